#include "prot/schedule.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "prot/errors.hpp"

namespace prot {

std::string to_string(LossMode mode) {
  return mode == LossMode::general ? "general" : "nonnegative";
}

LossMode loss_mode_from_string(const std::string& text) {
  if (text == "general") return LossMode::general;
  if (text == "nonnegative") return LossMode::nonnegative;
  throw ValidationError("unknown loss mode '" + text + "' (expected general|nonnegative)");
}

GammaSchedule GammaSchedule::power(double delta, double scale) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("power schedule needs delta > 0");
  if (!(scale > 0.0 && scale <= 1.0)) throw ValidationError("power schedule scale must be in (0, 1]");
  return GammaSchedule(Power{delta, scale});
}

GammaSchedule GammaSchedule::constant(double value) {
  if (!(value > 0.0 && value < 1.0)) throw ValidationError("constant schedule needs 0 < c < 1");
  return GammaSchedule(Constant{value});
}

GammaSchedule GammaSchedule::table(std::vector<double> values) {
  if (values.empty()) throw ValidationError("table schedule is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0 && values[i] < 1.0))
      throw ValidationError("table schedule entries must lie in (0, 1)");
    if (i > 0 && values[i] > values[i - 1])
      throw ValidationError("table schedule must be non-increasing (entry " + std::to_string(i + 1) + ")");
  }
  return GammaSchedule(Table{std::move(values)});
}

double GammaSchedule::operator()(std::size_t t) const {
  if (t == 0) throw ValidationError("gamma(t) is defined for t >= 1");
  return std::visit(
      [t](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Power>) {
          return k.scale * std::pow(static_cast<double>(t), -k.delta);
        } else if constexpr (std::is_same_v<K, Constant>) {
          return k.value;
        } else {
          if (t > k.values.size()) throw ScheduleError("gamma table exhausted", t);
          return k.values[t - 1];
        }
      },
      kind_);
}

bool GammaSchedule::bounded_domain() const noexcept { return std::holds_alternative<Table>(kind_); }

std::size_t GammaSchedule::domain_end() const noexcept {
  if (const auto* tab = std::get_if<Table>(&kind_)) return tab->values.size();
  return std::numeric_limits<std::size_t>::max();
}

GammaSchedule GammaSchedule::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ValidationError("bad number in gamma spec '" + text + "'");
    return x;
  };
  if (parts.size() >= 2 && parts.size() <= 3 && parts[0] == "power")
    return power(number(parts[1]), parts.size() == 3 ? number(parts[2]) : 1.0);
  if (parts.size() == 2 && (parts[0] == "const" || parts[0] == "constant"))
    return constant(number(parts[1]));
  throw ValidationError("gamma spec must be power:DELTA[:SCALE] or const:C, got '" + text + "'");
}

std::string GammaSchedule::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&out](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Power>) {
          out << "power:" << k.delta << ":" << k.scale;
        } else if constexpr (std::is_same_v<K, Constant>) {
          out << "const:" << k.value;
        } else {
          out << "table[" << k.values.size() << "]";
        }
      },
      kind_);
  return out.str();
}

double ScheduleConstants::limit() const {
  const double A_ = A();
  return std::min(A_, 1.0 / A_);
}

ScheduleConstants schedule_constants(double a, std::size_t num_experts, LossMode mode) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("parameter a must be positive");
  if (num_experts == 0) throw ValidationError("need at least one expert");
  const double log_term = 1.0 + std::log(static_cast<double>(num_experts));
  if (mode == LossMode::general) return {2.0 * std::expm1(3.0 / a), a * log_term, 3.0};
  return {std::expm1(2.0 / a), a * log_term, 2.0};
}

ScheduleConstants schedule_constants(const ScheduleParams& params) {
  return schedule_constants(params.a, params.num_experts, params.loss_mode);
}

namespace {

double checked_gamma(const ScheduleParams& params, const ScheduleConstants& k, std::size_t t) {
  const double g = params.gamma(t);
  if (!(g < k.limit())) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "gamma(t) = " << g << " is not below min{A, 1/A} = " << k.limit();
    throw ScheduleError(msg.str(), t);
  }
  return g;
}

double alpha_from(const ScheduleConstants& k, double gamma) {
  return 0.5 * (1.0 - std::log(k.c2 / k.c1) / std::log(gamma));
}

}  // namespace

void validate_schedule(const ScheduleParams& params) {
  if (!(params.v0 >= 0.0) || !std::isfinite(params.v0)) throw ValidationError("v0 must be >= 0");
  checked_gamma(params, schedule_constants(params), 1);
}

double alpha_t(const ScheduleParams& params, std::size_t t) {
  const auto k = schedule_constants(params);
  return alpha_from(k, checked_gamma(params, k, t));
}

double mu_t_closed_form(const ScheduleParams& params, std::size_t t) {
  const auto k = schedule_constants(params);
  const double g = checked_gamma(params, k, t);
  return std::sqrt(params.a * k.c1 / (1.0 + std::log(static_cast<double>(params.num_experts)))) *
         std::sqrt(g);
}

double mu_t(const ScheduleParams& params, std::size_t t) {
  const auto k = schedule_constants(params);
  const double g = checked_gamma(params, k, t);
  const double mu = params.a * std::pow(g, alpha_from(k, g));
#ifndef NDEBUG
  const double closed = mu_t_closed_form(params, t);
  assert(std::abs(mu - closed) <= 1e-10 * closed);
#endif
  return mu;
}

LearningRate LearningRate::finite(double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ValidationError("finite learning rate must be positive");
  LearningRate r;
  r.infinite_ = false;
  r.value_ = value;
  return r;
}

double LearningRate::value() const {
  if (infinite_) throw ValidationError("learning rate is infinite");
  return value_;
}

LearningRate rate_from(double mu, double volume) {
  if (!(volume >= 0.0)) throw ValidationError("volume must be >= 0");
  if (volume == 0.0) return LearningRate::infinite();
  return LearningRate::finite(1.0 / (mu * volume));
}

LearningRate epsilon_t(const ScheduleParams& params, std::size_t t, double v_prev) {
  return rate_from(mu_t(params, t), v_prev);
}

LearningRate epsilon_prime_t(const ScheduleParams& params, std::size_t t, double v_t) {
  return rate_from(mu_t(params, t), v_t);
}

double a_objective(double a, LossMode mode) {
  return mode == LossMode::general ? 2.0 * a * std::expm1(3.0 / a) : a * std::expm1(2.0 / a);
}

double choose_a(double target_eps, LossMode mode) {
  if (!(target_eps > 0.0)) throw ValidationError("target epsilon must be positive");
  const double target = (mode == LossMode::general ? 6.0 : 2.0) + target_eps;
  double lo = 3.0;
  if (a_objective(lo, mode) < target) return lo;
  double hi = 1e6;
  while (!(a_objective(hi, mode) < target)) hi *= 10.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (a_objective(mid, mode) < target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

namespace {

template <class Term>
double sum_over_steps(const ScheduleParams& params, std::span<const double> delta_v, Term term) {
  const auto k = schedule_constants(params);
  long double total = 0.0L;
  for (std::size_t t = 1; t <= delta_v.size(); ++t) {
    const double dv = delta_v[t - 1];
    if (!(dv >= 0.0)) throw ValidationError("delta_v entries must be >= 0");
    if (dv == 0.0) continue;
    total += term(k, t) * dv;
  }
  return static_cast<double>(total);
}

double regret_constant(LossMode mode, double target_eps) {
  return mode == LossMode::general ? 6.0 + target_eps : 2.0 + target_eps;
}

}  // namespace

double regret_bound(const ScheduleParams& params, std::span<const double> delta_v,
                    double target_eps) {
  const double lead = 2.0 * std::sqrt(regret_constant(params.loss_mode, target_eps) *
                                      (1.0 + std::log(static_cast<double>(params.num_experts))));
  long double sum = 0.0L;
  for (std::size_t t = 1; t <= delta_v.size(); ++t) {
    const double dv = delta_v[t - 1];
    if (!(dv >= 0.0)) throw ValidationError("delta_v entries must be >= 0");
    if (dv == 0.0) continue;
    sum += std::sqrt(params.gamma(t)) * dv;
  }
  return lead * static_cast<double>(sum);
}

double general_bound(const ScheduleParams& params, std::span<const double> delta_v) {
  return sum_over_steps(params, delta_v, [&](const ScheduleConstants& k, std::size_t t) {
    const double g = checked_gamma(params, k, t);
    const double alpha = alpha_from(k, g);
    return k.c1 * std::pow(g, 1.0 - alpha) + k.c2 * std::pow(g, alpha);
  });
}

double general_bound_closed_form(const ScheduleParams& params, std::span<const double> delta_v) {
  return sum_over_steps(params, delta_v, [&](const ScheduleConstants& k, std::size_t t) {
    return 2.0 * std::sqrt(k.c1 * k.c2) * std::sqrt(checked_gamma(params, k, t));
  });
}

double fpl_ifpl_gap_bound(const ScheduleParams& params, std::span<const double> delta_v) {
  return sum_over_steps(params, delta_v, [&](const ScheduleConstants& k, std::size_t t) {
    const double g = checked_gamma(params, k, t);
    return k.c1 * std::pow(g, 1.0 - alpha_from(k, g));
  });
}

double ifpl_regret_bound(const ScheduleParams& params, std::span<const double> delta_v) {
  return sum_over_steps(params, delta_v, [&](const ScheduleConstants& k, std::size_t t) {
    const double g = checked_gamma(params, k, t);
    return k.c2 * std::pow(g, alpha_from(k, g));
  });
}

double ifpl_start_term(const ScheduleParams& params, std::span<const double> delta_v) {
  if (delta_v.empty()) return 0.0;
  long double v_t = params.v0;
  for (double dv : delta_v) v_t += dv;
  const double log_n = 1.0 + std::log(static_cast<double>(params.num_experts));
  return log_n * mu_t(params, 1) * params.v0 -
         mu_t(params, delta_v.size()) * static_cast<double>(v_t);
}

double poly_bound(std::size_t num_experts, double horizon, double alpha, double delta,
                  double target_eps) {
  if (num_experts == 0) throw ValidationError("need at least one expert");
  if (!(alpha >= 0.0) || !(delta > 0.0)) throw ValidationError("poly bound needs alpha >= 0, delta > 0");
  return 2.0 * std::sqrt((6.0 + target_eps) * (1.0 + std::log(static_cast<double>(num_experts)))) *
         std::pow(horizon, 1.0 - 0.5 * delta + alpha);
}

nlohmann::json to_json(const GammaSchedule& gamma) {
  return std::visit(
      [](const auto& k) -> nlohmann::json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GammaSchedule::Power>) {
          return {{"kind", "power"}, {"delta", k.delta}, {"scale", k.scale}};
        } else if constexpr (std::is_same_v<K, GammaSchedule::Constant>) {
          return {{"kind", "const"}, {"value", k.value}};
        } else {
          return {{"kind", "table"}, {"values", k.values}};
        }
      },
      gamma.kind());
}

GammaSchedule gamma_from_json(const nlohmann::json& j) {
  if (j.is_string()) return GammaSchedule::parse(j.get<std::string>());
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power") return GammaSchedule::power(j.at("delta").get<double>(), j.value("scale", 1.0));
  if (kind == "const" || kind == "constant") return GammaSchedule::constant(j.at("value").get<double>());
  if (kind == "table") return GammaSchedule::table(j.at("values").get<std::vector<double>>());
  throw ValidationError("unknown gamma kind '" + kind + "'");
}

nlohmann::json to_json(const ScheduleParams& params) {
  return {{"a", params.a},
          {"N", params.num_experts},
          {"gamma", to_json(params.gamma)},
          {"v0", params.v0},
          {"loss_mode", to_string(params.loss_mode)}};
}

ScheduleParams schedule_from_json(const nlohmann::json& j) {
  ScheduleParams p;
  p.loss_mode = loss_mode_from_string(j.value("loss_mode", std::string("general")));
  if (j.contains("a"))
    p.a = j.at("a").get<double>();
  else if (j.contains("target_eps"))
    p.a = choose_a(j.at("target_eps").get<double>(), p.loss_mode);
  else
    throw ValidationError("schedule config needs 'a' or 'target_eps'");
  p.num_experts = j.at("N").get<std::size_t>();
  if (p.num_experts == 0) throw ValidationError("N must be >= 1");
  p.gamma = gamma_from_json(j.at("gamma"));
  p.v0 = j.value("v0", 0.0);
  if (!(p.v0 >= 0.0)) throw ValidationError("v0 must be >= 0");
  return p;
}

}  // namespace prot
