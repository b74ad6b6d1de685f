#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prot/game.hpp"
#include "prot/perturbation.hpp"
#include "prot/schedule.hpp"

namespace prot {

// Everything about an oblivious game that does not depend on the random
// perturbations, computed once and shared read-only by all seeds.
struct GamePlan {
  std::size_t num_experts = 0;
  std::size_t num_steps = 0;
  std::vector<double> losses;          // T x N
  std::vector<double> cumulative_prev; // T x N, row t-1 holds s_{1:t-1}
  std::vector<double> prot_scale;      // 1/eps_t, 0 when the rate is infinite
  std::vector<double> ifpl_scale;      // 1/eps'_t
  VolumeSeries volume;
  double best_expert_loss = 0.0;

  std::span<const double> loss_row(std::size_t t) const {
    return {losses.data() + (t - 1) * num_experts, num_experts};
  }
  std::span<const double> cumulative_row(std::size_t t) const {
    return {cumulative_prev.data() + (t - 1) * num_experts, num_experts};
  }
};

GamePlan make_plan(const LossMatrix& losses, const ScheduleParams& params);

struct MonteCarloOptions {
  PerturbationRegime regime = PerturbationRegime::per_step;
  bool with_ifpl = false;
  // 1-based steps at which the cumulative PROT loss of every seed is kept.
  std::vector<std::size_t> checkpoints;
};

// Per-seed outcomes, indexed by position in the seed list.
struct SeedBatch {
  std::size_t num_seeds = 0;
  std::vector<double> prot_loss;
  std::vector<double> ifpl_loss;
  std::vector<double> checkpoint_loss;  // seed-major, num_seeds x checkpoints.size()
};

struct SeedOutcome {
  double prot_loss = 0.0;
  double ifpl_loss = 0.0;
};

// One trajectory; IFPL reuses PROT's perturbations.
SeedOutcome simulate_seed(const GamePlan& plan, RngSpec spec, const MonteCarloOptions& options,
                          std::span<double> checkpoint_out);

// Reference implementation: seeds one after another.
SeedBatch simulate_seeds_serial(const GamePlan& plan, std::span<const RngSpec> seeds,
                                const MonteCarloOptions& options);
// OpenMP fan-out over seeds. Each seed owns its generator and output slot, so
// the result is bit-identical to the serial version.
SeedBatch simulate_seeds_parallel(const GamePlan& plan, std::span<const RngSpec> seeds,
                                  const MonteCarloOptions& options);

// Seeds {base, k} for k = 0..count-1: one stream per run.
std::vector<RngSpec> seed_streams(std::uint64_t base_seed, std::size_t count);

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double std_error = 0.0;
};

// Order-independent: values are sorted before accumulation.
SampleStats summarize(std::span<const double> values);

}  // namespace prot
