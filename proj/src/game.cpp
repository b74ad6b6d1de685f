#include "prot/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "prot/errors.hpp"
#include "prot/schedule.hpp"

namespace prot {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double x : values) {
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite value");
  }
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double x : values) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

LossMatrix::LossMatrix(std::size_t num_steps, std::size_t num_experts)
    : LossMatrix(num_steps, num_experts, std::vector<double>(num_steps * num_experts, 0.0)) {}

LossMatrix::LossMatrix(std::size_t num_steps, std::size_t num_experts, std::vector<double> values)
    : num_steps_(num_steps), num_experts_(num_experts), values_(std::move(values)) {
  if (num_experts_ == 0) throw ValidationError("loss matrix needs at least one expert");
  if (values_.size() != num_steps_ * num_experts_)
    throw ValidationError("loss matrix size does not match T x N");
  require_finite(values_, "loss matrix");
}

std::span<const double> LossMatrix::step(std::size_t t) const {
  if (t == 0 || t > num_steps_) throw ValidationError("step index out of range");
  return {values_.data() + (t - 1) * num_experts_, num_experts_};
}

std::span<double> LossMatrix::step(std::size_t t) {
  if (t == 0 || t > num_steps_) throw ValidationError("step index out of range");
  return {values_.data() + (t - 1) * num_experts_, num_experts_};
}

void LossMatrix::append_step(std::span<const double> losses) {
  if (losses.size() != num_experts_) throw ValidationError("loss row has wrong length");
  require_finite(losses, "loss row");
  values_.insert(values_.end(), losses.begin(), losses.end());
  ++num_steps_;
}

GameState GameState::initial(std::size_t num_experts, double v0) {
  if (num_experts == 0) throw ValidationError("game needs at least one expert");
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw ValidationError("v0 must be finite and >= 0");
  return GameState{0, std::vector<double>(num_experts, 0.0), v0, v0};
}

void update_state_in_place(GameState& state, std::span<const double> losses) {
  if (losses.size() != state.cumulative.size())
    throw ValidationError("loss vector length does not match the number of experts");
  require_finite(losses, "one-step losses");
  for (std::size_t i = 0; i < losses.size(); ++i) state.cumulative[i] += losses[i];
  state.volume += max_abs(losses);
  ++state.step;
}

GameState update_state(const GameState& state, std::span<const double> losses) {
  GameState next = state;
  update_state_in_place(next, losses);
  return next;
}

double scaled_fluctuation(double delta_v, double v) {
  if (!(delta_v >= 0.0) || !(v >= 0.0)) throw ValidationError("fluctuation inputs must be >= 0");
  if (v == 0.0) {
    if (delta_v != 0.0) throw ValidationError("delta_v exceeds v");
    return 0.0;
  }
  if (delta_v > v) throw ValidationError("delta_v exceeds v");
  return delta_v / v;
}

VolumeSeries volume_series(const LossMatrix& losses, double v0) {
  VolumeSeries out;
  out.v0 = v0;
  const std::size_t T = losses.num_steps();
  out.volume.reserve(T);
  out.delta_v.reserve(T);
  out.fluc.values.reserve(T);
  long double v = v0;
  for (std::size_t t = 1; t <= T; ++t) {
    const double dv = max_abs(losses.step(t));
    v += dv;
    const double vt = static_cast<double>(v);
    out.volume.push_back(vt);
    out.delta_v.push_back(dv);
    // Clamp the rounding of v_{t-1} + dv; dv <= v_t holds exactly in reals.
    out.fluc.values.push_back(scaled_fluctuation(std::min(dv, vt), vt));
  }
  return out;
}

FluctuationCheck check_fluctuation_bound(const FlucSeries& fluc, const GammaSchedule& gamma) {
  for (std::size_t t = 1; t <= fluc.values.size(); ++t) {
    if (fluc.values[t - 1] > gamma(t)) return {false, t};
  }
  return {true, std::nullopt};
}

double best_expert_loss(const LossMatrix& losses) {
  std::vector<long double> cum(losses.num_experts(), 0.0L);
  for (std::size_t t = 1; t <= losses.num_steps(); ++t) {
    const auto row = losses.step(t);
    for (std::size_t i = 0; i < row.size(); ++i) cum[i] += row[i];
  }
  return static_cast<double>(*std::min_element(cum.begin(), cum.end()));
}

LossMatrix read_loss_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("loss CSV is empty");
  std::size_t n = 0;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      if (cell != "expert_" + std::to_string(n + 1))
        throw ValidationError("loss CSV header must be expert_1,...,expert_N");
      ++n;
    }
  }
  if (n == 0) throw ValidationError("loss CSV header has no experts");
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(row, cell, ',')) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ValidationError("loss CSV row " + std::to_string(rows + 1) + ": bad number '" +
                              cell + "'");
      }
      if (used != cell.size())
        throw ValidationError("loss CSV row " + std::to_string(rows + 1) + ": bad number '" +
                              cell + "'");
      values.push_back(x);
      ++cols;
    }
    if (cols != n)
      throw ValidationError("loss CSV row " + std::to_string(rows + 1) + " has " +
                            std::to_string(cols) + " cells, expected " + std::to_string(n));
    ++rows;
  }
  return LossMatrix(rows, n, std::move(values));
}

LossMatrix read_loss_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open loss CSV: " + path);
  return read_loss_csv(in);
}

void write_loss_csv(std::ostream& out, const LossMatrix& losses) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < losses.num_experts(); ++i)
    out << (i ? "," : "") << "expert_" << i + 1;
  out << '\n';
  for (std::size_t t = 1; t <= losses.num_steps(); ++t) {
    const auto row = losses.step(t);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace prot
