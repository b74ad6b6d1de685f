#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "prot/errors.hpp"
#include "prot/montecarlo.hpp"
#include "prot/perturbation.hpp"

using namespace prot;

TEST_CASE("inverse-CDF exponential") {
  CHECK(exponential_from_uniform(0.0) == 0.0);
  CHECK(exponential_from_uniform(1.0 - std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(exponential_from_uniform(1.0), ValidationError);
  CHECK_THROWS_AS(exponential_from_uniform(-0.1), ValidationError);
}

TEST_CASE("exponential sampler moments") {
  Rng rng({1, 0});
  const auto xi = sample_exponential(1000000, rng);
  CHECK(*std::min_element(xi.begin(), xi.end()) >= 0.0);
  const auto s = summarize(xi);
  CHECK(s.mean == doctest::Approx(1.0).epsilon(0.003));
  CHECK(s.stddev == doctest::Approx(1.0).epsilon(0.005));
  // Tail: P{xi > 2} = e^{-2}.
  const double tail = static_cast<double>(std::count_if(xi.begin(), xi.end(), [](double x) { return x > 2.0; })) / 1e6;
  CHECK(std::abs(tail - std::exp(-2.0)) < 4.0 * std::sqrt(std::exp(-2.0) / 1e6));
}

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a({5, 3}), b({5, 3}), c({5, 4}), d({6, 3});
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
  Rng u({9, 0});
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("max tail and expected max bounds") {
  CHECK(max_tail_bound(1, 0.0) == 1.0);
  CHECK(max_tail_bound(2, std::log(2.0)) == doctest::Approx(1.0));
  CHECK(expected_max_bound(1) == 1.0);
  CHECK(expected_max_bound(2) == doctest::Approx(1.693147).epsilon(1e-6));
  CHECK(expected_max_bound(1000) == doctest::Approx(7.908).epsilon(1e-3));
  CHECK(harmonic_number(2) == 1.5);
  CHECK(harmonic_number(1000) == doctest::Approx(7.485).epsilon(1e-3));
  for (std::size_t n = 1; n < 2000; n += 37) CHECK(harmonic_number(n) <= expected_max_bound(n));

  // Empirical tail of the maximum of 5 exponentials against N e^{-x}.
  Rng rng({2, 0});
  const int trials = 200000;
  for (double x : {1.0, 2.0, 3.0}) {
    int hits = 0;
    for (int i = 0; i < trials; ++i) {
      double m = 0.0;
      for (int k = 0; k < 5; ++k) m = std::max(m, rng.exponential());
      hits += m > x;
    }
    CHECK(static_cast<double>(hits) / trials <= max_tail_bound(5, x));
  }
}

TEST_CASE("regime names") {
  CHECK(to_string(PerturbationRegime::per_step) == "per-step");
  CHECK(regime_from_string("once") == PerturbationRegime::once);
  CHECK_THROWS_AS(regime_from_string("twice"), ValidationError);
}
