#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace prot {

enum class LossMode { general, nonnegative };

std::string to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& text);

// gamma(t): a non-increasing bound on the scaled fluctuation, defined for t >= 1.
class GammaSchedule {
 public:
  // gamma(t) = scale * t^(-delta)
  struct Power {
    double delta = 1.0;
    double scale = 1.0;
  };
  struct Constant {
    double value = 0.01;
  };
  // gamma(t) = values[t-1]; undefined past the end.
  struct Table {
    std::vector<double> values;
  };

  static GammaSchedule power(double delta, double scale = 1.0);
  static GammaSchedule constant(double value);
  static GammaSchedule table(std::vector<double> values);

  double operator()(std::size_t t) const;

  // Horizon of a table schedule; power and constant schedules are unbounded.
  bool bounded_domain() const noexcept;
  std::size_t domain_end() const noexcept;

  const std::variant<Power, Constant, Table>& kind() const noexcept { return kind_; }

  // "power:DELTA", "power:DELTA:SCALE" or "const:C".
  static GammaSchedule parse(const std::string& text);
  std::string describe() const;

 private:
  explicit GammaSchedule(std::variant<Power, Constant, Table> kind) : kind_(std::move(kind)) {}
  std::variant<Power, Constant, Table> kind_;
};

struct ScheduleParams {
  double a = 10.0;
  std::size_t num_experts = 2;
  GammaSchedule gamma = GammaSchedule::constant(0.01);
  double v0 = 0.0;
  LossMode loss_mode = LossMode::general;
};

// Per-step constants of the bound decomposition
//   c1 * gamma^(1-alpha) + c2 * gamma^alpha,
// c1 = 2(e^{3/a}-1) (general) or e^{2/a}-1 (nonnegative), c2 = a(1+ln N).
struct ScheduleConstants {
  double c1;
  double c2;
  double exponent_factor;  // 3 (general) or 2 (nonnegative), the k in exp{(k/a) gamma^{1-alpha}}

  double A() const { return c1 / c2; }
  double limit() const;  // min{A, 1/A}
};

ScheduleConstants schedule_constants(double a, std::size_t num_experts, LossMode mode);
ScheduleConstants schedule_constants(const ScheduleParams& params);

// Throws ScheduleError(step=1) when gamma(1) >= min{A, 1/A}; gamma is non-increasing
// so this covers every later step of power/constant schedules.
void validate_schedule(const ScheduleParams& params);

double alpha_t(const ScheduleParams& params, std::size_t t);

// a * gamma(t)^alpha_t; in debug builds cross-checked against mu_t_closed_form.
double mu_t(const ScheduleParams& params, std::size_t t);
double mu_t_closed_form(const ScheduleParams& params, std::size_t t);

// A learning rate that may be infinite (no volume seen yet).
class LearningRate {
 public:
  static LearningRate finite(double value);
  static LearningRate infinite() { return LearningRate(); }

  bool is_infinite() const noexcept { return infinite_; }
  double value() const;  // throws for the infinite rate

  // 1/epsilon, the coefficient multiplying the perturbation; 0 when infinite.
  double perturbation_scale() const noexcept { return infinite_ ? 0.0 : 1.0 / value_; }

 private:
  LearningRate() = default;
  bool infinite_ = true;
  double value_ = 0.0;
};

LearningRate rate_from(double mu, double volume);
LearningRate epsilon_t(const ScheduleParams& params, std::size_t t, double v_prev);
LearningRate epsilon_prime_t(const ScheduleParams& params, std::size_t t, double v_t);

// f(a) = 2a(e^{3/a}-1) (general) or a(e^{2/a}-1) (nonnegative).
double a_objective(double a, LossMode mode);
double choose_a(double target_eps, LossMode mode);

// 2 sqrt((6+eps)(1+ln N)) * sum gamma(t)^{1/2} dv_t, with (2+eps) for nonnegative losses.
double regret_bound(const ScheduleParams& params, std::span<const double> delta_v,
                    double target_eps);

// sum_t (c1 gamma^{1-alpha_t} + c2 gamma^{alpha_t}) dv_t
double general_bound(const ScheduleParams& params, std::span<const double> delta_v);
// Same quantity after minimising each term over alpha: 2 sqrt(c1 c2) sum gamma^{1/2} dv_t.
double general_bound_closed_form(const ScheduleParams& params, std::span<const double> delta_v);

// Gap allowed between PROT and IFPL: sum c1 gamma^{1-alpha_t} dv_t.
double fpl_ifpl_gap_bound(const ScheduleParams& params, std::span<const double> delta_v);
// IFPL regret bound: sum c2 gamma^{alpha_t} dv_t.
double ifpl_regret_bound(const ScheduleParams& params, std::span<const double> delta_v);
// Extra IFPL term when v0 > 0: (1 + ln N) mu_1 v0 - mu_T v_T. The plain bound assumes v0 = 0,
// where this term is never positive.
double ifpl_start_term(const ScheduleParams& params, std::span<const double> delta_v);

// 2 sqrt((6+eps)(1+ln N)) T^{1 - delta/2 + alpha}
double poly_bound(std::size_t num_experts, double horizon, double alpha, double delta,
                  double target_eps);

// Schedule config: {"a" | "target_eps", "N", "gamma": {...}, "v0", "loss_mode"}.
nlohmann::json to_json(const GammaSchedule& gamma);
GammaSchedule gamma_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScheduleParams& params);
ScheduleParams schedule_from_json(const nlohmann::json& j);

}  // namespace prot
