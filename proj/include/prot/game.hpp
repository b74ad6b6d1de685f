#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prot {

class GammaSchedule;

// Expert one-step losses, row-major: row t-1 holds s^1_t..s^N_t.
class LossMatrix {
 public:
  LossMatrix() = default;
  LossMatrix(std::size_t num_steps, std::size_t num_experts);
  LossMatrix(std::size_t num_steps, std::size_t num_experts, std::vector<double> values);

  std::size_t num_steps() const noexcept { return num_steps_; }
  std::size_t num_experts() const noexcept { return num_experts_; }

  // t is 1-based, as in the game loop.
  std::span<const double> step(std::size_t t) const;
  std::span<double> step(std::size_t t);
  double at(std::size_t t, std::size_t expert) const { return step(t)[expert]; }

  const std::vector<double>& values() const noexcept { return values_; }

  void append_step(std::span<const double> losses);

 private:
  std::size_t num_steps_ = 0;
  std::size_t num_experts_ = 1;
  std::vector<double> values_;
};

struct GameState {
  std::size_t step = 0;
  std::vector<double> cumulative;
  double volume = 0.0;
  double v0 = 0.0;

  static GameState initial(std::size_t num_experts, double v0);
};

// Advances by one step: cumulative[i] += losses[i], volume += max_i |losses[i]|.
GameState update_state(const GameState& state, std::span<const double> losses);
void update_state_in_place(GameState& state, std::span<const double> losses);

// delta_v / v with 0/0 = 0.
double scaled_fluctuation(double delta_v, double v);

struct FlucSeries {
  std::vector<double> values;  // values[t-1] = fluc(t)
};

struct VolumeSeries {
  double v0 = 0.0;
  std::vector<double> volume;   // v_1..v_T
  std::vector<double> delta_v;  // Delta v_1..Delta v_T
  FlucSeries fluc;
};

VolumeSeries volume_series(const LossMatrix& losses, double v0);

struct FluctuationCheck {
  bool holds = true;
  std::optional<std::size_t> first_violation;  // 1-based step
};

FluctuationCheck check_fluctuation_bound(const FlucSeries& fluc, const GammaSchedule& gamma);

// Best expert's cumulative loss over the whole matrix.
double best_expert_loss(const LossMatrix& losses);

// CSV with header expert_1,...,expert_N and one row per step.
LossMatrix read_loss_csv(std::istream& in);
LossMatrix read_loss_csv_file(const std::string& path);
void write_loss_csv(std::ostream& out, const LossMatrix& losses);

}  // namespace prot
