#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "prot/game.hpp"
#include "prot/schedule.hpp"

namespace prot {

struct PriceSeries {
  std::vector<double> prices;  // S_0..S_M
  std::string source;

  std::size_t num_increments() const { return prices.empty() ? 0 : prices.size() - 1; }
};

void validate_prices(const PriceSeries& series);

struct FbmParams {
  double hurst = 0.5;
  std::size_t steps = 1024;  // M
  double scale = 1.0;
  double drift = 0.0;
  double s0 = 100.0;
  std::uint64_t seed = 0;
};

// Autocovariance of unit fractional Gaussian noise at lag k.
double fgn_autocovariance(double hurst, std::size_t lag);

// Exact fractional Gaussian noise from i.i.d. N(0,1) innovations by the
// Durbin-Levinson recursion (Hosking's method); equivalent to multiplying the
// innovations by the Cholesky factor of the Toeplitz covariance.
std::vector<double> fgn_from_normals(double hurst, std::span<const double> normals);

// S_t = S_0 + scale * B_H(t/M) + drift * t/M on the grid t = 0..M.
PriceSeries fbm_generate(const FbmParams& params);

// Gains of the two zero-sum experts, one per price increment k = 0..M-1:
// s1_k = 2C (S_k - S_0)(S_{k+1} - S_k), s2_k = -s1_k. Game step t uses k = t-1.
struct ExpertGains {
  std::vector<double> s1;
  std::vector<double> s2;
};

ExpertGains expert_gains(const PriceSeries& prices, double c);

// Losses seen by the learner: gains counted as negative losses.
LossMatrix gains_as_losses(const ExpertGains& gains);

struct IdentityCheck {
  double macro = 0.0;  // (S_M - S_0)^2
  double cross = 0.0;  // sum 2 (S_t - S_0) dS_t
  double micro = 0.0;  // sum dS_t^2
  double residual = 0.0;
  bool within_tolerance = true;  // residual <= 1e-9 max(1, macro)
};

IdentityCheck volatility_identity_check(const PriceSeries& prices);

struct TradingConfig {
  double c = 1.0;
  // N = 2, gamma constant (the mu of the trading analysis); v0 > 0.
  ScheduleParams schedule;
  double target_eps = 1.0;
};

void validate_trading_config(const TradingConfig& config);

struct LearnerGain {
  std::vector<double> gain;        // G_t
  std::vector<double> cumulative;  // G_{1:t}
  std::vector<double> p1;          // P{I_t = 1}
  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

// Derandomised PROT: G_t = s1_t (P{I_t=1} - P{I_t=2}) with exact probabilities.
LearnerGain learner_gain(const PriceSeries& prices, const TradingConfig& config);

struct TradingRow {
  std::size_t t = 0;
  double price = 0.0;  // S_t at the end of step t
  double s1_cum = 0.0;
  double s2_cum = 0.0;
  double learner_cum = 0.0;
  double volume = 0.0;
  double fluc = 0.0;
};

struct TradingReport {
  std::vector<TradingRow> rows;
  std::vector<std::size_t> fluc_violations;  // steps with fluc(t) > gamma
  IdentityCheck identity;
  // G_{1:T} >= |sum s1| - 2 mu^{1/2} sqrt((6+eps)(1+ln 2)) (sum |s1| + v0)
  double defensive_lhs = 0.0;
  double defensive_rhs = 0.0;
  bool defensive_holds = false;
};

TradingReport run_trading_experiment(const TradingConfig& config, const PriceSeries& prices);

// Single column `price`.
PriceSeries read_price_csv(std::istream& in);
PriceSeries read_price_csv_file(const std::string& path);
void write_price_csv(std::ostream& out, const PriceSeries& prices);

// t,S,s1_cum,s2_cum,learner_cum,volume,fluc
void write_trading_csv(std::ostream& out, const TradingReport& report);

}  // namespace prot
