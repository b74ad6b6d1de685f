#include <doctest.h>

#include <cmath>

#include "prot/errors.hpp"
#include "prot/perturbation.hpp"
#include "prot/schedule.hpp"

using namespace prot;

namespace {

ScheduleParams example_params() {
  ScheduleParams p;
  p.a = 10.0;
  p.num_experts = 2;
  p.gamma = GammaSchedule::power(1.0);
  return p;
}

// Independent evaluation of the optimal exponent from its defining formula.
double alpha_oracle(double a, double n, double gamma) {
  const double c1 = 2.0 * (std::exp(3.0 / a) - 1.0);
  const double c2 = a * (1.0 + std::log(n));
  return 0.5 * (1.0 - std::log(c2 / c1) / std::log(gamma));
}

}  // namespace

TEST_CASE("alpha and mu at a=10, N=2, t=100") {
  const auto p = example_params();
  CHECK(alpha_oracle(10, 2, 0.01) == doctest::Approx(0.84594).epsilon(1e-5));
  CHECK(alpha_t(p, 100) == doctest::Approx(alpha_oracle(10, 2, 0.01)).epsilon(1e-13));
  CHECK(mu_t(p, 100) == doctest::Approx(0.203289).epsilon(1e-6));
  CHECK(mu_t(p, 100) == doctest::Approx(std::sqrt(6.99718 / 1.693147) * 0.1).epsilon(1e-5));
  const auto k = schedule_constants(p);
  CHECK(1.0 / k.A() == doctest::Approx(24.197).epsilon(1e-4));
}

TEST_CASE("gamma at the limit is rejected with the step index") {
  auto p = example_params();
  const double limit = schedule_constants(p).limit();
  p.gamma = GammaSchedule::constant(limit);
  try {
    alpha_t(p, 7);
    FAIL("expected ScheduleError");
  } catch (const ScheduleError& e) {
    CHECK(e.step() == 7);
  }
  CHECK_THROWS_AS(mu_t(p, 1), ScheduleError);
  p.gamma = GammaSchedule::power(1.0);
  CHECK_THROWS_AS(validate_schedule(p), ScheduleError);  // gamma(1) = 1 is never admissible
  p.gamma = GammaSchedule::power(1.0, 0.9 * limit);
  CHECK_NOTHROW(validate_schedule(p));
}

TEST_CASE("alpha is one half when A = 1") {
  // Solve a(1 + ln 2) = 2(e^{3/a} - 1) by plain bisection.
  double lo = 1.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g = mid * (1.0 + std::log(2.0)) - 2.0 * std::expm1(3.0 / mid);
    (g < 0.0 ? lo : hi) = mid;
  }
  ScheduleParams p;
  p.a = 0.5 * (lo + hi);
  p.num_experts = 2;
  p.gamma = GammaSchedule::constant(0.3);
  CHECK(schedule_constants(p).A() == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t t : {1u, 5u, 100u}) CHECK(alpha_t(p, t) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("mu scales with the square root of gamma") {
  ScheduleParams p = example_params();
  p.gamma = GammaSchedule::constant(0.02);
  const double m1 = mu_t(p, 3);
  p.gamma = GammaSchedule::constant(0.01);
  const double m2 = mu_t(p, 3);
  CHECK(m2 / m1 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("learning rates") {
  CHECK(rate_from(0.2, 5.0).value() == doctest::Approx(1.0));
  CHECK(rate_from(0.2, 0.0).is_infinite());
  CHECK(rate_from(0.2, 0.0).perturbation_scale() == 0.0);
  CHECK_THROWS_AS(rate_from(0.2, 0.0).value(), ValidationError);
  CHECK(rate_from(0.2, 10.0).value() == doctest::Approx(0.5));

  const auto p = example_params();
  CHECK(epsilon_t(p, 100, 10.0).value() == doctest::Approx(0.49191).epsilon(1e-5));
  CHECK(epsilon_t(p, 100, 0.0).is_infinite());
  CHECK(epsilon_prime_t(p, 100, 10.0).value() == epsilon_t(p, 100, 10.0).value());
  CHECK(epsilon_prime_t(p, 100, 12.0).value() < epsilon_t(p, 100, 10.0).value());
}

TEST_CASE("choose_a") {
  const double a = choose_a(1.0, LossMode::general);
  CHECK(a_objective(a, LossMode::general) < 7.0);
  CHECK(a_objective(a * (1.0 - 1e-9), LossMode::general) >= 7.0 - 1e-6);
  CHECK(a == doctest::Approx(10.0).epsilon(0.01));
  CHECK(a_objective(10.0, LossMode::general) == doctest::Approx(6.997).epsilon(1e-4));

  const double b = choose_a(1.0, LossMode::nonnegative);
  CHECK(a_objective(b, LossMode::nonnegative) < 3.0);
  CHECK(b <= 4.0);
  CHECK(a_objective(4.0, LossMode::nonnegative) == doctest::Approx(2.595).epsilon(1e-3));

  // Large targets admit small a; the objective decreases towards 6 (resp. 2).
  CHECK(choose_a(1e6, LossMode::general) <= 3.0 + 1e-9);
  CHECK(choose_a(0.001, LossMode::general) > choose_a(0.01, LossMode::general));
  CHECK_THROWS_AS(choose_a(0.0, LossMode::general), ValidationError);
}

TEST_CASE("regret bound values") {
  ScheduleParams p;
  p.num_experts = 2;
  p.gamma = GammaSchedule::constant(0.01);
  const std::vector<double> dv(100, 1.0);
  CHECK(regret_bound(p, dv, 1.0) == doctest::Approx(2 * std::sqrt(7 * 1.693147) * 10).epsilon(1e-6));
  CHECK(regret_bound(p, dv, 1.0) == doctest::Approx(68.85).epsilon(1e-3));
  CHECK(regret_bound(p, {}, 1.0) == 0.0);
  p.loss_mode = LossMode::nonnegative;
  CHECK(regret_bound(p, dv, 1.0) == doctest::Approx(45.08).epsilon(1e-3));

  CHECK(poly_bound(2, 1000, 0.1, 1.0, 1.0) == doctest::Approx(434.4).epsilon(1e-3));
  CHECK(poly_bound(2, 1, 0.1, 1.0, 1.0) == doctest::Approx(2 * std::sqrt(7 * (1 + std::log(2.0)))));
  CHECK(poly_bound(3, 10, 0.0, 2.0, 1.0) == doctest::Approx(poly_bound(3, 1e6, 0.0, 2.0, 1.0)));
}

TEST_CASE("general bound splits into the gap and IFPL terms") {
  ScheduleParams p = example_params();
  p.gamma = GammaSchedule::power(1.0, 0.03);
  const std::vector<double> dv{1.0, 0.5, 2.0, 0.0, 3.0};
  CHECK(general_bound(p, dv) ==
        doctest::Approx(fpl_ifpl_gap_bound(p, dv) + ifpl_regret_bound(p, dv)).epsilon(1e-12));
  CHECK(general_bound(p, {}) == 0.0);
  CHECK(general_bound_closed_form(p, {}) == 0.0);
}

TEST_CASE("property: mu dual form and general bound closed form") {
  Rng rng({7, 1});
  for (int i = 0; i < 500; ++i) {
    ScheduleParams p;
    p.a = 3.0 + 100.0 * rng.uniform();
    p.num_experts = 1 + static_cast<std::size_t>(rng.uniform() * 1000);
    p.loss_mode = rng.uniform() < 0.5 ? LossMode::general : LossMode::nonnegative;
    const double limit = schedule_constants(p).limit();
    p.gamma = GammaSchedule::power(0.5 + rng.uniform(), limit * (0.01 + 0.98 * rng.uniform()));
    const std::size_t t = 1 + static_cast<std::size_t>(rng.uniform() * 1000);
    CHECK(mu_t(p, t) == doctest::Approx(mu_t_closed_form(p, t)).epsilon(1e-10));
    std::vector<double> dv(1 + static_cast<std::size_t>(rng.uniform() * 50));
    for (auto& x : dv) x = 5.0 * rng.uniform();
    CHECK(general_bound(p, dv) == doctest::Approx(general_bound_closed_form(p, dv)).epsilon(1e-9));
  }
}

TEST_CASE("gamma schedules") {
  const auto g = GammaSchedule::parse("power:1");
  CHECK(g(4) == doctest::Approx(0.25));
  const auto h = GammaSchedule::parse("power:0.5:0.1");
  CHECK(h(4) == doctest::Approx(0.05));
  const auto c = GammaSchedule::parse("const:0.01");
  CHECK(c(1000) == 0.01);
  CHECK_FALSE(c.bounded_domain());
  CHECK_THROWS_AS(GammaSchedule::parse("linear:2"), ValidationError);
  CHECK_THROWS_AS(GammaSchedule::parse("power:x"), ValidationError);
  CHECK_THROWS_AS(GammaSchedule::constant(1.0), ValidationError);
  CHECK_THROWS_AS(GammaSchedule::power(1.0, 1.5), ValidationError);

  const auto tab = GammaSchedule::table({0.1, 0.05});
  CHECK(tab.bounded_domain());
  CHECK(tab.domain_end() == 2);
  CHECK(tab(2) == 0.05);
  CHECK_THROWS_AS(tab(3), ScheduleError);
  CHECK_THROWS_AS(GammaSchedule::table({0.1, 0.2}), ValidationError);

  for (const auto& s : {g, h, c, tab}) {
    const auto back = gamma_from_json(to_json(s));
    CHECK(back(2) == s(2));
  }
}

TEST_CASE("schedule JSON") {
  const auto p = schedule_from_json(
      nlohmann::json{{"target_eps", 1.0}, {"N", 3}, {"gamma", "const:0.001"}, {"loss_mode", "nonnegative"}});
  CHECK(p.num_experts == 3);
  CHECK(p.loss_mode == LossMode::nonnegative);
  CHECK(p.a == choose_a(1.0, LossMode::nonnegative));
  const auto q = schedule_from_json(to_json(p));
  CHECK(q.a == p.a);
  CHECK(q.gamma(5) == p.gamma(5));
  CHECK_THROWS_AS(schedule_from_json(nlohmann::json{{"N", 2}}), ValidationError);
}
