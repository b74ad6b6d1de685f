#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "prot/errors.hpp"
#include "prot/fpl.hpp"

namespace prot {

std::size_t perturbed_argmin(std::span<const double> cumulative, double scale,
                             std::span<const double> xi) {
  std::size_t best = 0;
  double best_score = cumulative[0] - scale * xi[0];
  for (std::size_t i = 1; i < cumulative.size(); ++i) {
    const double score = cumulative[i] - scale * xi[i];
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

std::size_t prot_select(std::span<const double> cumulative, const LearningRate& rate,
                        std::span<const double> xi) {
  if (cumulative.empty()) throw ValidationError("no experts to select from");
  if (xi.size() != cumulative.size()) throw ValidationError("perturbation length mismatch");
  return perturbed_argmin(cumulative, rate.perturbation_scale(), xi);
}

double selection_probability_two(double s1, double s2, double eps) {
  const double d = eps * (s1 - s2);
  return d >= 0.0 ? 0.5 * std::exp(-d) : 1.0 - 0.5 * std::exp(d);
}

namespace {

std::vector<double> leader_one_hot(std::span<const double> cumulative) {
  std::vector<double> p(cumulative.size(), 0.0);
  p[std::min_element(cumulative.begin(), cumulative.end()) - cumulative.begin()] = 1.0;
  return p;
}

// P{I=j} = e^{-x0} * int_0^1 prod_{i != j} (1 - b_i u) du with
// d_i = eps (s_i - s_j), x0 = max(0, max_i -d_i), b_i = e^{-(d_i + x0)} in (0, 1].
// The integral comes from substituting u = e^{-(x - x0)} in
// int_{x0}^inf e^{-x} prod (1 - e^{-(d_i + x)}) dx.
struct ShiftedFactors {
  double weight;  // e^{-x0}
  std::vector<double> b;
};

ShiftedFactors shifted_factors(std::span<const double> s, std::size_t j, double eps) {
  double x0 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != j) x0 = std::max(x0, -eps * (s[i] - s[j]));
  }
  ShiftedFactors f{std::exp(-x0), {}};
  f.b.reserve(s.size() - 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != j) f.b.push_back(std::exp(-(eps * (s[i] - s[j]) + x0)));
  }
  return f;
}

// Sum over subsets of the expanded product, grouped by subset size:
// int_0^1 prod (1 - b_i u) du = sum_k (-1)^k e_k(b) / (k + 1).
double expanded_integral(std::span<const double> b) {
  std::vector<double> e(b.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t k = i + 1; k >= 1; --k) e[k] += e[k - 1] * b[i];
  }
  double total = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    total += (k % 2 == 0 ? 1.0 : -1.0) * e[k] / static_cast<double>(k + 1);
  }
  return total;
}

double quadrature_integral(std::span<const double> b) {
  auto integrand = [b](double u) {
    double p = 1.0;
    for (double bi : b) p *= 1.0 - bi * u;
    return p;
  };
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-13);
}

void check_inputs(std::span<const double> cumulative) {
  if (cumulative.empty()) throw ValidationError("no experts");
  for (double x : cumulative) {
    if (!std::isfinite(x)) throw ValidationError("cumulative losses must be finite");
  }
}

}  // namespace

std::vector<double> selection_probabilities_quadrature(std::span<const double> cumulative,
                                                       double eps) {
  check_inputs(cumulative);
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be finite and positive");
  std::vector<double> p(cumulative.size());
  for (std::size_t j = 0; j < cumulative.size(); ++j) {
    const auto f = shifted_factors(cumulative, j, eps);
    p[j] = std::clamp(f.weight * quadrature_integral(f.b), 0.0, 1.0);
  }
  return p;
}

std::vector<double> selection_probabilities_exact(std::span<const double> cumulative,
                                                  const LearningRate& rate) {
  check_inputs(cumulative);
  if (rate.is_infinite()) return leader_one_hot(cumulative);
  const double eps = rate.value();
  const std::size_t n = cumulative.size();
  if (n == 1) return {1.0};
  if (n > 12) return selection_probabilities_quadrature(cumulative, eps);
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto f = shifted_factors(cumulative, j, eps);
    p[j] = std::clamp(f.weight * expanded_integral(f.b), 0.0, 1.0);
  }
  return p;
}

std::vector<double> selection_probabilities_mc(std::span<const double> cumulative,
                                               const LearningRate& rate,
                                               std::size_t num_samples, Rng& rng) {
  check_inputs(cumulative);
  if (num_samples == 0) throw ValidationError("need at least one sample");
  std::vector<std::size_t> counts(cumulative.size(), 0);
  std::vector<double> xi(cumulative.size());
  const double scale = rate.perturbation_scale();
  for (std::size_t k = 0; k < num_samples; ++k) {
    sample_exponential(xi, rng);
    ++counts[perturbed_argmin(cumulative, scale, xi)];
  }
  std::vector<double> p(cumulative.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(num_samples);
  return p;
}

RatioCheck probability_ratio_check(std::span<const double> cumulative_prev,
                                   std::span<const double> loss_t, const ScheduleParams& params,
                                   std::size_t t, double v_prev, double v_t, double slack) {
  const std::size_t n = cumulative_prev.size();
  if (n == 0 || loss_t.size() != n || n != params.num_experts)
    throw ValidationError("probability ratio check: length mismatch");
  if (!(v_prev >= 0.0) || !(v_t >= v_prev)) throw ValidationError("volumes must satisfy 0 <= v_prev <= v_t");
  const double delta_v = v_t - v_prev;
  const double fluc = scaled_fluctuation(delta_v, v_t);
  const double gamma = params.gamma(t);
  const double tol = 1e-12;
  if (fluc > gamma * (1.0 + tol)) throw PreconditionError("fluc(t) exceeds gamma(t)");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(loss_t[i]) > delta_v * (1.0 + tol) + tol)
      throw PreconditionError("one-step loss exceeds the volume increment");
    if (std::abs(cumulative_prev[i]) > v_prev * (1.0 + tol) + tol)
      throw PreconditionError("cumulative loss exceeds the volume");
    if (params.loss_mode == LossMode::nonnegative && (loss_t[i] < 0.0 || cumulative_prev[i] < 0.0))
      throw PreconditionError("negative loss in nonnegative mode");
  }

  const auto k = schedule_constants(params);
  const double alpha = alpha_t(params, t);
  const double mu = mu_t(params, t);

  std::vector<double> cumulative_now(n);
  for (std::size_t i = 0; i < n; ++i) cumulative_now[i] = cumulative_prev[i] + loss_t[i];

  RatioCheck out;
  out.factor = std::exp((k.exponent_factor / params.a) * std::pow(gamma, 1.0 - alpha));
  out.prot_probabilities = selection_probabilities_exact(cumulative_prev, rate_from(mu, v_prev));
  out.ifpl_probabilities = selection_probabilities_exact(cumulative_now, rate_from(mu, v_t));
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double excess = out.prot_probabilities[j] - out.factor * out.ifpl_probabilities[j];
    out.worst_excess = std::max(out.worst_excess, excess);
  }
  out.holds = out.worst_excess <= slack;
  return out;
}

namespace {

std::vector<double> expected_cumulative(const LossMatrix& losses, const ScheduleParams& params,
                                        bool infeasible) {
  if (losses.num_experts() != params.num_experts)
    throw ValidationError("schedule N does not match the loss matrix");
  GameState state = GameState::initial(losses.num_experts(), params.v0);
  std::vector<double> out;
  out.reserve(losses.num_steps());
  long double total = 0.0L;
  for (std::size_t t = 1; t <= losses.num_steps(); ++t) {
    const double mu = mu_t(params, t);
    const auto row = losses.step(t);
    std::vector<double> p;
    if (infeasible) {
      update_state_in_place(state, row);
      p = selection_probabilities_exact(state.cumulative, rate_from(mu, state.volume));
    } else {
      p = selection_probabilities_exact(state.cumulative, rate_from(mu, state.volume));
      update_state_in_place(state, row);
    }
    long double step = 0.0L;
    for (std::size_t j = 0; j < row.size(); ++j) step += static_cast<long double>(p[j]) * row[j];
    total += step;
    out.push_back(static_cast<double>(total));
  }
  return out;
}

}  // namespace

std::vector<double> expected_cumulative_loss_exact(const LossMatrix& losses,
                                                   const ScheduleParams& params, bool infeasible) {
  return expected_cumulative(losses, params, infeasible);
}

double expected_loss_exact(const LossMatrix& losses, const ScheduleParams& params,
                           bool infeasible) {
  const auto c = expected_cumulative(losses, params, infeasible);
  return c.empty() ? 0.0 : c.back();
}

}  // namespace prot
