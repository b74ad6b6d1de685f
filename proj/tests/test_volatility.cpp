#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "prot/errors.hpp"
#include "prot/montecarlo.hpp"
#include "prot/volatility.hpp"

using namespace prot;

namespace {

std::vector<double> increments(const PriceSeries& s) {
  std::vector<double> d(s.num_increments());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = s.prices[i + 1] - s.prices[i];
  return d;
}

TradingConfig trading_config(double mu) {
  TradingConfig cfg;
  cfg.c = 1.0;
  cfg.target_eps = 1.0;
  cfg.schedule.num_experts = 2;
  cfg.schedule.a = choose_a(1.0, LossMode::general);
  cfg.schedule.v0 = 1.0;
  cfg.schedule.gamma = GammaSchedule::constant(mu);
  return cfg;
}

}  // namespace

TEST_CASE("Hosking recursion equals the Cholesky factor of the covariance") {
  for (double h : {0.2, 0.5, 0.8}) {
    const int m = 64;
    Eigen::MatrixXd cov(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) cov(i, j) = fgn_autocovariance(h, static_cast<std::size_t>(std::abs(i - j)));
    const Eigen::MatrixXd l = cov.llt().matrixL();
    Rng rng({static_cast<std::uint64_t>(h * 10), 0});
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = rng.normal();
    const Eigen::VectorXd expected = l * z;
    const auto got = fgn_from_normals(h, std::span<const double>(z.data(), m));
    for (int i = 0; i < m; ++i) CHECK(got[i] == doctest::Approx(expected(i)).epsilon(1e-9));
  }
}

TEST_CASE("H = 1/2 gives uncorrelated increments") {
  const auto path = fbm_generate({0.5, 10000, 1.0, 0.0, 100.0, 3});
  const auto d = increments(path);
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(d.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    den += (d[i] - mean) * (d[i] - mean);
    if (i + 1 < d.size()) num += (d[i] - mean) * (d[i + 1] - mean);
  }
  CHECK(std::abs(num / den) < 4.0 / std::sqrt(static_cast<double>(d.size())));
}

TEST_CASE("H = 0.8 block variance scales like b^{2H}") {
  // Regress log mean squared block increment on log block size, averaged over a few paths.
  std::vector<double> xs, ys;
  for (std::size_t b = 1; b <= 64; b *= 2) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto path = fbm_generate({0.8, 10000, 1.0, 0.0, 0.0, seed});
      for (std::size_t i = 0; i + b < path.prices.size(); i += b) {
        const double inc = path.prices[i + b] - path.prices[i];
        acc += inc * inc;
        ++count;
      }
    }
    xs.push_back(std::log(static_cast<double>(b)));
    ys.push_back(std::log(acc / static_cast<double>(count)));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(slope - 1.6) < 0.1);
}

TEST_CASE("fBm generation is deterministic and validated") {
  const FbmParams p{0.3, 500, 2.0, 0.5, 10.0, 11};
  CHECK(fbm_generate(p).prices == fbm_generate(p).prices);
  FbmParams q = p;
  q.seed = 12;
  CHECK(fbm_generate(p).prices != fbm_generate(q).prices);
  CHECK(fbm_generate(p).prices.front() == 10.0);
  q.hurst = 1.0;
  CHECK_THROWS_AS(fbm_generate(q), ValidationError);
}

TEST_CASE("expert gains and the volatility identity") {
  const PriceSeries s{{1.0, 2.0, 4.0}, "test"};
  const auto g = expert_gains(s, 1.0);
  CHECK(g.s1 == std::vector<double>{0.0, 4.0});
  CHECK(g.s2 == std::vector<double>{0.0, -4.0});
  const auto id = volatility_identity_check(s);
  CHECK(id.macro == 9.0);
  CHECK(id.cross == 4.0);
  CHECK(id.micro == 5.0);
  CHECK(id.residual == 0.0);
  CHECK(volatility_identity_check(PriceSeries{{3.0, 5.0}, ""}).residual == 0.0);

  const PriceSeries flat{{2.0, 2.0, 2.0, 2.0}, ""};
  for (double x : expert_gains(flat, 3.0).s1) CHECK(x == 0.0);
  CHECK_THROWS_AS(validate_prices(PriceSeries{{1.0}, ""}), ValidationError);
  CHECK_THROWS_AS(validate_prices(PriceSeries{{1.0, NAN}, ""}), ValidationError);
}

TEST_CASE("property: telescoped expert gain and zero sum on random paths") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double h = 0.2 + 0.03 * static_cast<double>(seed);
    const auto path = fbm_generate({h, 1000, 3.0, 0.1, 50.0, seed});
    const double c = 0.5 + static_cast<double>(seed % 3);
    const auto g = expert_gains(path, c);
    long double s1 = 0.0L;
    for (std::size_t k = 0; k < g.s1.size(); ++k) {
      CHECK(g.s1[k] + g.s2[k] == 0.0);
      s1 += g.s1[k];
    }
    const auto id = volatility_identity_check(path);
    CHECK(id.within_tolerance);
    CHECK(static_cast<double>(s1) == doctest::Approx(c * (id.macro - id.micro)).epsilon(1e-9));
  }
}

TEST_CASE("derandomised learner gain") {
  const auto path = fbm_generate({0.8, 300, 1.0, 0.0, 100.0, 5});
  const auto cfg = trading_config(0.02);
  const auto lg = learner_gain(path, cfg);
  REQUIRE(lg.gain.size() == 300);
  CHECK(lg.gain[0] == 0.0);
  CHECK(lg.p1[0] == 0.5);
  const auto g = expert_gains(path, cfg.c);
  for (std::size_t t = 0; t < lg.gain.size(); ++t) {
    const double expected_sign = (g.s1[t] > 0) - (g.s1[t] < 0);
    const double gap = 2.0 * lg.p1[t] - 1.0;
    const double gap_sign = (gap > 0) - (gap < 0);
    const double sign = (lg.gain[t] > 0) - (lg.gain[t] < 0);
    CHECK(sign == expected_sign * gap_sign);
  }

  // Monte Carlo expectation of the randomised learner.
  const auto plan = make_plan(gains_as_losses(g), cfg.schedule);
  const auto seeds = seed_streams(1, 10000);
  const auto batch = simulate_seeds_parallel(plan, seeds, {});
  const auto st = summarize(batch.prot_loss);
  CHECK(std::abs(-st.mean - lg.total()) <= 3.0 * st.std_error);
}

TEST_CASE("trading report") {
  const auto path = fbm_generate({0.8, 2000, 1.0, 0.0, 100.0, 6});
  const auto cfg = trading_config(0.02);
  const auto rep = run_trading_experiment(cfg, path);
  REQUIRE(rep.rows.size() == 2000);
  CHECK(rep.identity.within_tolerance);
  CHECK(rep.defensive_holds);
  for (std::size_t t = 1; t < rep.rows.size(); ++t) {
    CHECK(rep.rows[t].s1_cum == -rep.rows[t].s2_cum);
    CHECK(rep.rows[t].volume >= rep.rows[t - 1].volume);
  }
  std::ostringstream out;
  write_trading_csv(out, rep);
  CHECK(out.str().rfind("t,S,s1_cum,s2_cum,learner_cum,volume,fluc\n", 0) == 0);

  auto bad = cfg;
  bad.schedule.gamma = GammaSchedule::power(1.0, 0.02);
  CHECK_THROWS_AS(run_trading_experiment(bad, path), ValidationError);
  bad = cfg;
  bad.schedule.v0 = 0.0;
  CHECK_THROWS_AS(run_trading_experiment(bad, path), ValidationError);
}

TEST_CASE("price CSV round trip") {
  const PriceSeries s{{1.0, 2.5, -3.0}, "x"};
  std::stringstream ss;
  write_price_csv(ss, s);
  CHECK(read_price_csv(ss).prices == s.prices);
  std::stringstream bad("price\n1\nfoo\n");
  CHECK_THROWS_AS(read_price_csv(bad), ValidationError);
}
