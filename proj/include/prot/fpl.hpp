#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "prot/game.hpp"
#include "prot/perturbation.hpp"
#include "prot/schedule.hpp"

namespace prot {

// argmin_i { cumulative[i] - scale * xi[i] }, scale = 1/epsilon (0 for the
// infinite rate). Ties go to the lowest index.
std::size_t prot_select(std::span<const double> cumulative, const LearningRate& rate,
                        std::span<const double> xi);
std::size_t perturbed_argmin(std::span<const double> cumulative, double scale,
                             std::span<const double> xi);

struct StepRecord {
  std::size_t t = 0;
  std::size_t chosen = 0;  // 0-based expert index
  double loss = 0.0;
  double cum_loss = 0.0;
  double volume = 0.0;
  double delta_v = 0.0;
  double fluc = 0.0;
  double mu = 0.0;
  LearningRate rate = LearningRate::infinite();
  std::vector<double> perturbation;  // filled only when auditing
};

struct RunRecord {
  std::vector<StepRecord> steps;
  double total_loss() const { return steps.empty() ? 0.0 : steps.back().cum_loss; }
};

struct RunOptions {
  PerturbationRegime regime = PerturbationRegime::per_step;
  bool record_perturbations = false;
};

RunRecord prot_run(const LossMatrix& losses, const ScheduleParams& params, Rng& rng,
                   RunOptions options = {});
RunRecord ifpl_run(const LossMatrix& losses, const ScheduleParams& params, Rng& rng,
                   RunOptions options = {});

// Runs with caller-provided perturbations, one vector per step (or a single
// vector reused under the `once` regime). Used to inject degenerate xi in tests.
RunRecord prot_run_with(const LossMatrix& losses, const ScheduleParams& params,
                        const std::function<std::span<const double>(std::size_t t)>& xi_for_step);

// Non-oblivious game: the losses at step t may depend on the realised choices
// I_1..I_{t-1}.
class AdaptiveGame {
 public:
  virtual ~AdaptiveGame() = default;
  virtual std::size_t num_experts() const = 0;
  virtual std::vector<double> losses(std::size_t t, std::span<const std::size_t> past_choices) = 0;
};

struct AdaptiveRun {
  RunRecord record;
  LossMatrix realised_losses;
  // sum_t E_t(s_t), the conditional expected loss given the past, per step.
  double expected_loss_sum = 0.0;
};

AdaptiveRun prot_run_adaptive(AdaptiveGame& game, std::size_t horizon,
                              const ScheduleParams& params, Rng& rng);

// P{argmin_i (s_i - xi_i/eps) = j}, xi_i i.i.d. Exp(1). Exact symmetric-polynomial
// expansion for N <= 12, adaptive Gauss-Kronrod on [0,1] above that.
std::vector<double> selection_probabilities_exact(std::span<const double> cumulative,
                                                  const LearningRate& rate);
// Quadrature route for any N; kept separately so both routes can be compared.
std::vector<double> selection_probabilities_quadrature(std::span<const double> cumulative,
                                                       double eps);
// N = 2: P{I=1} = e^{-d}/2 for d >= 0, 1 - e^{d}/2 otherwise, d = eps (s_1 - s_2).
double selection_probability_two(double s1, double s2, double eps);

std::vector<double> selection_probabilities_mc(std::span<const double> cumulative,
                                               const LearningRate& rate,
                                               std::size_t num_samples, Rng& rng);

struct RatioCheck {
  bool holds = true;
  double factor = 1.0;        // exp{(k/a) gamma(t)^{1-alpha_t}}
  double worst_excess = 0.0;  // max_j P{I=j} - factor P{J=j}
  std::vector<double> prot_probabilities;
  std::vector<double> ifpl_probabilities;
};

// Exact check of P{I_t=j} <= exp{(k/a) gamma(t)^{1-alpha_t}} P{J_t=j} for one step.
RatioCheck probability_ratio_check(std::span<const double> cumulative_prev,
                                   std::span<const double> loss_t, const ScheduleParams& params,
                                   std::size_t t, double v_prev, double v_t,
                                   double slack = 1e-9);

// Exact expected cumulative loss sum_t sum_j P{I_t=j} s^j_t of PROT (or IFPL)
// on an oblivious game.
double expected_loss_exact(const LossMatrix& losses, const ScheduleParams& params,
                           bool infeasible = false);
std::vector<double> expected_cumulative_loss_exact(const LossMatrix& losses,
                                                   const ScheduleParams& params,
                                                   bool infeasible = false);

// t,chosen,loss,cum_loss,v,delta_v,fluc,mu,eps  (chosen is 1-based, eps may be inf)
void write_run_csv(std::ostream& out, const RunRecord& record);

}  // namespace prot
