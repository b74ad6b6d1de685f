#include "prot/volatility.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "prot/errors.hpp"
#include "prot/fpl.hpp"
#include "prot/perturbation.hpp"

namespace prot {

void validate_prices(const PriceSeries& series) {
  if (series.prices.size() < 2) throw ValidationError("price series needs at least two prices");
  for (double s : series.prices) {
    if (!std::isfinite(s)) throw ValidationError("price series contains a non-finite value");
  }
}

double fgn_autocovariance(double hurst, std::size_t lag) {
  const double k = static_cast<double>(lag);
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
}

std::vector<double> fgn_from_normals(double hurst, std::span<const double> normals) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ValidationError("Hurst exponent must lie in (0, 1)");
  const std::size_t m = normals.size();
  std::vector<double> x(m);
  if (m == 0) return x;
  std::vector<double> cov(m);
  for (std::size_t k = 0; k < m; ++k) cov[k] = fgn_autocovariance(hurst, k);

  std::vector<double> phi(m, 0.0), prev(m, 0.0);
  double v = cov[0];
  x[0] = std::sqrt(v) * normals[0];
  for (std::size_t n = 1; n < m; ++n) {
    double acc = cov[n];
    for (std::size_t j = 1; j < n; ++j) acc -= prev[j] * cov[n - j];
    const double phi_nn = acc / v;
    phi[n] = phi_nn;
    for (std::size_t j = 1; j < n; ++j) phi[j] = prev[j] - phi_nn * prev[n - j];
    v *= 1.0 - phi_nn * phi_nn;
    double mean = 0.0;
    for (std::size_t j = 1; j <= n; ++j) mean += phi[j] * x[n - j];
    x[n] = mean + std::sqrt(v) * normals[n];
    std::swap(phi, prev);
  }
  return x;
}

PriceSeries fbm_generate(const FbmParams& params) {
  if (!(params.hurst > 0.0 && params.hurst < 1.0))
    throw ValidationError("Hurst exponent must lie in (0, 1)");
  if (params.steps < 1) throw ValidationError("fBm path needs M >= 1");
  Rng rng(RngSpec{params.seed, 0});
  std::vector<double> z(params.steps);
  for (double& zi : z) zi = rng.normal();
  const auto noise = fgn_from_normals(params.hurst, z);

  const double m = static_cast<double>(params.steps);
  const double increment_scale = params.scale * std::pow(m, -params.hurst);
  PriceSeries out;
  out.prices.resize(params.steps + 1);
  out.prices[0] = params.s0;
  long double walk = 0.0L;
  for (std::size_t t = 1; t <= params.steps; ++t) {
    walk += noise[t - 1];
    out.prices[t] = params.s0 + increment_scale * static_cast<double>(walk) +
                    params.drift * static_cast<double>(t) / m;
  }
  std::ostringstream src;
  src << "fbm(H=" << params.hurst << ",M=" << params.steps << ",scale=" << params.scale
      << ",drift=" << params.drift << ",seed=" << params.seed << ")";
  out.source = src.str();
  return out;
}

ExpertGains expert_gains(const PriceSeries& prices, double c) {
  validate_prices(prices);
  if (!(c > 0.0)) throw ValidationError("position constant C must be positive");
  const auto& s = prices.prices;
  const std::size_t m = prices.num_increments();
  ExpertGains g;
  g.s1.resize(m);
  g.s2.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    g.s1[k] = 2.0 * c * (s[k] - s[0]) * (s[k + 1] - s[k]);
    g.s2[k] = -g.s1[k];
  }
  return g;
}

LossMatrix gains_as_losses(const ExpertGains& gains) {
  std::vector<double> values;
  values.reserve(2 * gains.s1.size());
  for (std::size_t k = 0; k < gains.s1.size(); ++k) {
    values.push_back(-gains.s1[k]);
    values.push_back(-gains.s2[k]);
  }
  return LossMatrix(gains.s1.size(), 2, std::move(values));
}

IdentityCheck volatility_identity_check(const PriceSeries& prices) {
  validate_prices(prices);
  const auto& s = prices.prices;
  long double cross = 0.0L;
  long double micro = 0.0L;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const long double ds = static_cast<long double>(s[k + 1]) - s[k];
    cross += 2.0L * (static_cast<long double>(s[k]) - s[0]) * ds;
    micro += ds * ds;
  }
  const long double total = static_cast<long double>(s.back()) - s[0];
  IdentityCheck out;
  out.macro = static_cast<double>(total * total);
  out.cross = static_cast<double>(cross);
  out.micro = static_cast<double>(micro);
  out.residual = static_cast<double>(std::abs(total * total - (cross + micro)));
  out.within_tolerance = out.residual <= 1e-9 * std::max(1.0, out.macro);
  return out;
}

void validate_trading_config(const TradingConfig& config) {
  if (!(config.c > 0.0)) throw ValidationError("position constant C must be positive");
  if (config.schedule.num_experts != 2) throw ValidationError("the trading game has two experts");
  if (!(config.schedule.v0 > 0.0)) throw ValidationError("the trading game needs v0 > 0");
  if (!std::holds_alternative<GammaSchedule::Constant>(config.schedule.gamma.kind()))
    throw ValidationError("the trading game uses a constant gamma");
  if (!(config.target_eps > 0.0)) throw ValidationError("target epsilon must be positive");
  validate_schedule(config.schedule);
}

LearnerGain learner_gain(const PriceSeries& prices, const TradingConfig& config) {
  validate_trading_config(config);
  const auto gains = expert_gains(prices, config.c);
  const std::size_t m = gains.s1.size();
  LearnerGain out;
  out.gain.reserve(m);
  out.cumulative.reserve(m);
  out.p1.reserve(m);
  std::vector<double> cum_loss{0.0, 0.0};
  long double volume = config.schedule.v0;
  long double total = 0.0L;
  for (std::size_t t = 1; t <= m; ++t) {
    const double mu = mu_t(config.schedule, t);
    const auto p =
        selection_probabilities_exact(cum_loss, rate_from(mu, static_cast<double>(volume)));
    const double s1 = gains.s1[t - 1];
    const double g = s1 * (p[0] - p[1]);
    total += g;
    out.gain.push_back(g);
    out.cumulative.push_back(static_cast<double>(total));
    out.p1.push_back(p[0]);
    cum_loss[0] -= s1;
    cum_loss[1] += s1;
    volume += std::abs(s1);
  }
  return out;
}

TradingReport run_trading_experiment(const TradingConfig& config, const PriceSeries& prices) {
  validate_trading_config(config);
  const auto gains = expert_gains(prices, config.c);
  const auto learner = learner_gain(prices, config);
  const double mu = config.schedule.gamma(1);

  TradingReport report;
  report.identity = volatility_identity_check(prices);
  long double s1_cum = 0.0L;
  long double abs_sum = 0.0L;
  long double volume = config.schedule.v0;
  for (std::size_t t = 1; t <= gains.s1.size(); ++t) {
    const double s1 = gains.s1[t - 1];
    s1_cum += s1;
    abs_sum += std::abs(s1);
    volume += std::abs(s1);
    TradingRow row;
    row.t = t;
    row.price = prices.prices[t];
    row.s1_cum = static_cast<double>(s1_cum);
    row.s2_cum = -row.s1_cum;
    row.learner_cum = learner.cumulative[t - 1];
    row.volume = static_cast<double>(volume);
    row.fluc = scaled_fluctuation(std::min(std::abs(s1), row.volume), row.volume);
    if (row.fluc > mu) report.fluc_violations.push_back(t);
    report.rows.push_back(row);
  }
  const double lead = 2.0 * std::sqrt(mu) *
                      std::sqrt((6.0 + config.target_eps) * (1.0 + std::log(2.0)));
  report.defensive_lhs = learner.total();
  report.defensive_rhs = std::abs(static_cast<double>(s1_cum)) -
                         lead * (static_cast<double>(abs_sum) + config.schedule.v0);
  report.defensive_holds = report.defensive_lhs >= report.defensive_rhs;
  return report;
}

PriceSeries read_price_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("price CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "price") throw ValidationError("price CSV header must be 'price'");
  PriceSeries out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size())
      throw ValidationError("price CSV row " + std::to_string(row) + ": bad number '" + line + "'");
    out.prices.push_back(x);
  }
  out.source = "csv";
  validate_prices(out);
  return out;
}

PriceSeries read_price_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open price CSV: " + path);
  auto series = read_price_csv(in);
  series.source = "csv:" + path;
  return series;
}

void write_price_csv(std::ostream& out, const PriceSeries& prices) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "price\n";
  for (double s : prices.prices) out << s << '\n';
  out.precision(old_precision);
}

void write_trading_csv(std::ostream& out, const TradingReport& report) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "t,S,s1_cum,s2_cum,learner_cum,volume,fluc\n";
  for (const auto& r : report.rows) {
    out << r.t << ',' << r.price << ',' << r.s1_cum << ',' << r.s2_cum << ',' << r.learner_cum
        << ',' << r.volume << ',' << r.fluc << '\n';
  }
  out.precision(old_precision);
}

}  // namespace prot
