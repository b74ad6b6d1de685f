#include <doctest.h>

#include <cmath>
#include <sstream>

#include "prot/errors.hpp"
#include "prot/fpl.hpp"
#include "prot/games.hpp"
#include "prot/montecarlo.hpp"

using namespace prot;

namespace {

LossMatrix warmup_game() {
  LossMatrix m(0, 2);
  const double s1[] = {0.5, 0, 1, 0, 1, 0, 1};
  const double s2[] = {0, 1, 0, 1, 0, 1, 0};
  for (int t = 0; t < 7; ++t) {
    const double row[] = {s1[t], s2[t]};
    m.append_step(row);
  }
  return m;
}

ScheduleParams params_for(std::size_t n, double v0 = 0.0) {
  ScheduleParams p;
  p.a = 10.0;
  p.num_experts = n;
  p.gamma = GammaSchedule::constant(0.01);
  p.v0 = v0;
  return p;
}

LossMatrix random_game(std::size_t n, std::size_t steps, std::uint64_t seed) {
  Rng rng({seed, 99});
  LossMatrix m(0, n);
  std::vector<double> row(n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (auto& x : row) x = rng.uniform();
    m.append_step(row);
  }
  return m;
}

}  // namespace

TEST_CASE("zero perturbations follow the leader on the warm-up game") {
  const auto game = warmup_game();
  const std::vector<double> zero{0.0, 0.0};
  const auto run = prot_run_with(game, params_for(2), [&](std::size_t) { return std::span<const double>(zero); });
  // Leader alternates: expert 1, then 2, 1, 2, ... always picking the expert about to lose 1.
  const std::size_t expected[] = {0, 1, 0, 1, 0, 1, 0};
  for (std::size_t t = 0; t < 7; ++t) CHECK(run.steps[t].chosen == expected[t]);
  CHECK(run.total_loss() == 6.5);
  CHECK(best_expert_loss(game) == 3.0);
  CHECK(run.steps[0].rate.is_infinite());
  CHECK(run.steps.back().volume == 6.5);
}

TEST_CASE("single expert has zero regret") {
  LossMatrix m(0, 1);
  Rng gen({4, 0});
  for (int t = 0; t < 50; ++t) {
    const double row[] = {2.0 * gen.uniform() - 1.0};
    m.append_step(row);
  }
  Rng rng({1, 0});
  const auto run = prot_run(m, params_for(1), rng);
  CHECK(run.total_loss() == doctest::Approx(best_expert_loss(m)).epsilon(1e-14));
  Rng rng2({1, 0});
  CHECK(ifpl_run(m, params_for(1), rng2).total_loss() == doctest::Approx(best_expert_loss(m)).epsilon(1e-14));
  CHECK(expected_loss_exact(m, params_for(1)) == doctest::Approx(best_expert_loss(m)).epsilon(1e-14));
}

TEST_CASE("runs are deterministic per seed") {
  const auto game = random_game(3, 200, 1);
  for (auto regime : {PerturbationRegime::once, PerturbationRegime::per_step}) {
    Rng a({77, 0}), b({77, 0}), c({78, 0});
    const RunOptions opt{regime, true};
    const auto ra = prot_run(game, params_for(3, 1.0), a, opt);
    const auto rb = prot_run(game, params_for(3, 1.0), b, opt);
    const auto rc = prot_run(game, params_for(3, 1.0), c, opt);
    bool differs = false;
    for (std::size_t t = 0; t < ra.steps.size(); ++t) {
      REQUIRE(ra.steps[t].chosen == rb.steps[t].chosen);
      REQUIRE(ra.steps[t].perturbation == rb.steps[t].perturbation);
      differs = differs || ra.steps[t].perturbation != rc.steps[t].perturbation;
    }
    CHECK(differs);
    if (regime == PerturbationRegime::once)
      CHECK(ra.steps.front().perturbation == ra.steps.back().perturbation);
  }
}

TEST_CASE("IFPL with zero perturbations is the clairvoyant leader") {
  const auto game = random_game(4, 100, 2);
  const std::vector<double> zero(4, 0.0);
  auto state = GameState::initial(4, 0.0);
  double clairvoyant = 0.0;
  for (std::size_t t = 1; t <= game.num_steps(); ++t) {
    update_state_in_place(state, game.step(t));
    std::size_t best = 0;
    for (std::size_t i = 1; i < 4; ++i)
      if (state.cumulative[i] < state.cumulative[best]) best = i;
    clairvoyant += game.at(t, best);
  }
  // With zero perturbations the scale is irrelevant.
  const auto plan = make_plan(game, params_for(4));
  double ifpl = 0.0;
  for (std::size_t t = 1; t <= plan.num_steps; ++t) {
    std::vector<double> now(4);
    for (std::size_t i = 0; i < 4; ++i) now[i] = plan.cumulative_row(t)[i] + plan.loss_row(t)[i];
    ifpl += plan.loss_row(t)[perturbed_argmin(now, plan.ifpl_scale[t - 1], zero)];
  }
  CHECK(ifpl == doctest::Approx(clairvoyant).epsilon(1e-12));
  CHECK(clairvoyant <= best_expert_loss(game) + 1e-12);  // be-the-leader never loses to the best expert
}

TEST_CASE("Monte Carlo mean matches the exact expectation") {
  const auto game = random_game(3, 60, 3);
  const auto p = params_for(3, 1.0);
  const double exact = expected_loss_exact(game, p);
  const double exact_ifpl = expected_loss_exact(game, p, true);
  for (auto regime : {PerturbationRegime::once, PerturbationRegime::per_step}) {
    std::vector<double> totals, ifpl_totals;
    for (std::uint64_t s = 0; s < 20000; ++s) {
      Rng rng({s, 0});
      totals.push_back(prot_run(game, p, rng, {regime, false}).total_loss());
      Rng rng2({s, 0});
      ifpl_totals.push_back(ifpl_run(game, p, rng2, {regime, false}).total_loss());
    }
    const auto st = summarize(totals);
    CHECK(std::abs(st.mean - exact) <= 4.0 * st.std_error);
    const auto si = summarize(ifpl_totals);
    CHECK(std::abs(si.mean - exact_ifpl) <= 4.0 * si.std_error);
  }
  const auto curve = expected_cumulative_loss_exact(game, p);
  CHECK(curve.size() == 60);
  CHECK(curve.back() == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("adaptive game sees past choices") {
  struct Punisher : AdaptiveGame {
    std::size_t num_experts() const override { return 2; }
    std::vector<double> losses(std::size_t, std::span<const std::size_t> past) override {
      std::vector<double> row{0.0, 0.0};
      if (!past.empty()) row[past.back()] = 1.0;
      return row;
    }
  };
  Punisher game;
  Rng rng({5, 0});
  const auto run = prot_run_adaptive(game, 40, params_for(2, 1.0), rng);
  CHECK(run.record.steps.size() == 40);
  CHECK(run.realised_losses.num_steps() == 40);
  for (std::size_t t = 2; t <= 40; ++t)
    CHECK(run.realised_losses.at(t, run.record.steps[t - 2].chosen) == 1.0);
}

TEST_CASE("invalid schedules abort with the failing step") {
  auto p = params_for(2);
  p.gamma = GammaSchedule::table({0.01, 0.01, 0.01});
  const auto game = random_game(2, 5, 4);
  Rng rng({1, 0});
  try {
    prot_run(game, p, rng);
    FAIL("expected ScheduleError");
  } catch (const ScheduleError& e) {
    CHECK(e.step() == 4);
  }
  CHECK_THROWS_AS(prot_run(game, params_for(3), rng), ValidationError);
}

TEST_CASE("run CSV") {
  const auto game = warmup_game();
  const std::vector<double> zero{0.0, 0.0};
  const auto run = prot_run_with(game, params_for(2), [&](std::size_t) { return std::span<const double>(zero); });
  std::ostringstream out;
  write_run_csv(out, run);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,chosen,loss,cum_loss,v,delta_v,fluc,mu,eps");
  std::getline(in, line);
  CHECK(line.rfind("1,1,0.5,0.5,0.5,0.5,1,", 0) == 0);
  CHECK(line.substr(line.size() - 3) == "inf");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 7);
}

TEST_CASE("property: exact expected loss lies between the best expert and the worst") {
  Rng rng({31, 0});
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const auto game = random_game(n, 30, 100 + trial);
    auto p = params_for(n, rng.uniform());
    const double e = expected_loss_exact(game, p);
    double worst_step_sum = 0.0;
    double best_step_sum = 0.0;
    for (std::size_t t = 1; t <= game.num_steps(); ++t) {
      const auto row = game.step(t);
      worst_step_sum += *std::max_element(row.begin(), row.end());
      best_step_sum += *std::min_element(row.begin(), row.end());
    }
    CHECK(e <= worst_step_sum + 1e-9);
    CHECK(e >= best_step_sum - 1e-9);
  }
}

TEST_CASE("IFPL bound needs the start term when v0 > 0") {
  // Exact expectations, no sampling: on this fluctuation-bounded game the plain bound fails.
  ScheduleParams p;
  p.a = choose_a(1.0, LossMode::general);
  p.num_experts = 5;
  p.v0 = 1.0;
  p.gamma = GammaSchedule::power(1.0, 0.9 * schedule_constants(p).limit());
  const auto game = fluc_bounded_game(5, 2000, p.gamma, p.v0, LossMode::general, GamePattern::drift, 1004);
  const auto vs = volume_series(game, p.v0);
  REQUIRE(check_fluctuation_bound(vs.fluc, p.gamma).holds);
  const double ifpl_regret = expected_loss_exact(game, p, true) - best_expert_loss(game);
  const double plain = ifpl_regret_bound(p, vs.delta_v);
  const double start = ifpl_start_term(p, vs.delta_v);
  CHECK(ifpl_regret > plain);
  CHECK(ifpl_regret <= plain + start);
  const double v_t = vs.volume.back();
  CHECK(start == doctest::Approx((1.0 + std::log(5.0)) * mu_t(p, 1) * 1.0 - mu_t(p, 2000) * v_t).epsilon(1e-12));
  p.v0 = 0.0;
  CHECK(ifpl_start_term(p, vs.delta_v) <= 0.0);
  CHECK(ifpl_start_term(p, {}) == 0.0);
}
