#include "prot/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "prot/errors.hpp"
#include "prot/fpl.hpp"

namespace prot {

GamePlan make_plan(const LossMatrix& losses, const ScheduleParams& params) {
  if (losses.num_experts() != params.num_experts)
    throw ValidationError("schedule N does not match the loss matrix");
  GamePlan plan;
  plan.num_experts = losses.num_experts();
  plan.num_steps = losses.num_steps();
  plan.losses = losses.values();
  plan.cumulative_prev.resize(plan.losses.size());
  plan.prot_scale.resize(plan.num_steps);
  plan.ifpl_scale.resize(plan.num_steps);
  plan.volume = volume_series(losses, params.v0);
  plan.best_expert_loss = best_expert_loss(losses);

  GameState state = GameState::initial(plan.num_experts, params.v0);
  for (std::size_t t = 1; t <= plan.num_steps; ++t) {
    const double mu = mu_t(params, t);
    std::copy(state.cumulative.begin(), state.cumulative.end(),
              plan.cumulative_prev.begin() + (t - 1) * plan.num_experts);
    plan.prot_scale[t - 1] = rate_from(mu, state.volume).perturbation_scale();
    update_state_in_place(state, losses.step(t));
    plan.ifpl_scale[t - 1] = rate_from(mu, state.volume).perturbation_scale();
  }
  return plan;
}

SeedOutcome simulate_seed(const GamePlan& plan, RngSpec spec, const MonteCarloOptions& options,
                          std::span<double> checkpoint_out) {
  const std::size_t n = plan.num_experts;
  Rng rng(spec);
  std::vector<double> xi(n);
  std::vector<double> now(n);
  if (options.regime == PerturbationRegime::once) sample_exponential(xi, rng);
  double prot = 0.0;
  double ifpl = 0.0;
  std::size_t next_checkpoint = 0;
  for (std::size_t t = 1; t <= plan.num_steps; ++t) {
    if (options.regime == PerturbationRegime::per_step) sample_exponential(xi, rng);
    const auto prev = plan.cumulative_row(t);
    const auto row = plan.loss_row(t);
    prot += row[perturbed_argmin(prev, plan.prot_scale[t - 1], xi)];
    if (options.with_ifpl) {
      for (std::size_t i = 0; i < n; ++i) now[i] = prev[i] + row[i];
      ifpl += row[perturbed_argmin(now, plan.ifpl_scale[t - 1], xi)];
    }
    while (next_checkpoint < options.checkpoints.size() &&
           options.checkpoints[next_checkpoint] == t) {
      checkpoint_out[next_checkpoint++] = prot;
    }
  }
  return {prot, ifpl};
}

namespace {

SeedBatch allocate(std::size_t num_seeds, const MonteCarloOptions& options) {
  if (!std::is_sorted(options.checkpoints.begin(), options.checkpoints.end()))
    throw ValidationError("checkpoints must be sorted");
  SeedBatch batch;
  batch.num_seeds = num_seeds;
  batch.prot_loss.resize(num_seeds);
  batch.ifpl_loss.resize(options.with_ifpl ? num_seeds : 0);
  batch.checkpoint_loss.resize(num_seeds * options.checkpoints.size());
  return batch;
}

void store(SeedBatch& batch, std::size_t k, const SeedOutcome& o) {
  batch.prot_loss[k] = o.prot_loss;
  if (!batch.ifpl_loss.empty()) batch.ifpl_loss[k] = o.ifpl_loss;
}

}  // namespace

SeedBatch simulate_seeds_serial(const GamePlan& plan, std::span<const RngSpec> seeds,
                                const MonteCarloOptions& options) {
  SeedBatch batch = allocate(seeds.size(), options);
  const std::size_t m = options.checkpoints.size();
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    std::span<double> cp(batch.checkpoint_loss.data() + k * m, m);
    store(batch, k, simulate_seed(plan, seeds[k], options, cp));
  }
  return batch;
}

SeedBatch simulate_seeds_parallel(const GamePlan& plan, std::span<const RngSpec> seeds,
                                  const MonteCarloOptions& options) {
  SeedBatch batch = allocate(seeds.size(), options);
  const std::size_t m = options.checkpoints.size();
  const auto count = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    std::span<double> cp(batch.checkpoint_loss.data() + idx * m, m);
    store(batch, idx, simulate_seed(plan, seeds[idx], options, cp));
  }
  return batch;
}

std::vector<RngSpec> seed_streams(std::uint64_t base_seed, std::size_t count) {
  std::vector<RngSpec> seeds(count);
  for (std::size_t k = 0; k < count; ++k) seeds[k] = RngSpec{base_seed, k};
  return seeds;
}

SampleStats summarize(std::span<const double> values) {
  SampleStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  long double sum = 0.0L;
  for (double x : sorted) sum += x;
  const long double mean = sum / static_cast<long double>(sorted.size());
  long double ss = 0.0L;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  s.mean = static_cast<double>(mean);
  if (sorted.size() > 1) {
    s.stddev = static_cast<double>(std::sqrt(ss / static_cast<long double>(sorted.size() - 1)));
    s.std_error = s.stddev / std::sqrt(static_cast<double>(sorted.size()));
  }
  return s;
}

}  // namespace prot
