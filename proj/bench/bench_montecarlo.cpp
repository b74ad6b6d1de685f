// Serial vs OpenMP seed fan-out on the same game plan.

#include <benchmark/benchmark.h>

#include "prot/games.hpp"
#include "prot/montecarlo.hpp"

namespace {

prot::GamePlan bench_plan(std::size_t n, std::size_t steps) {
  prot::ScheduleParams p;
  p.a = prot::choose_a(1.0, prot::LossMode::general);
  p.num_experts = n;
  p.v0 = 1.0;
  p.gamma = prot::GammaSchedule::power(1.0, 0.9 * prot::schedule_constants(p).limit());
  const auto losses = prot::fluc_bounded_game(n, steps, p.gamma, p.v0, prot::LossMode::general,
                                              prot::GamePattern::random, 1);
  return prot::make_plan(losses, p);
}

template <bool Parallel>
void seeds(benchmark::State& state) {
  const auto plan = bench_plan(static_cast<std::size_t>(state.range(0)), 2000);
  const auto streams = prot::seed_streams(0, static_cast<std::size_t>(state.range(1)));
  const prot::MonteCarloOptions opts{prot::PerturbationRegime::per_step, true, {}};
  for (auto _ : state) {
    auto batch = Parallel ? prot::simulate_seeds_parallel(plan, streams, opts)
                          : prot::simulate_seeds_serial(plan, streams, opts);
    benchmark::DoNotOptimize(batch.prot_loss.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1) * 2000);
}

}  // namespace

BENCHMARK(seeds<false>)->Name("simulate_seeds_serial")->Args({2, 1000})->Args({10, 1000})->Unit(benchmark::kMillisecond);
BENCHMARK(seeds<true>)->Name("simulate_seeds_parallel")->Args({2, 1000})->Args({10, 1000})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
