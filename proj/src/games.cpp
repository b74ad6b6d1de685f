#include "prot/games.hpp"

#include <algorithm>
#include <cmath>

#include "prot/errors.hpp"
#include "prot/perturbation.hpp"

namespace prot {

std::string to_string(GamePattern pattern) {
  switch (pattern) {
    case GamePattern::random: return "random";
    case GamePattern::drift: return "drift";
    case GamePattern::rotating: return "rotating";
  }
  return "random";
}

GamePattern pattern_from_string(const std::string& text) {
  if (text == "random") return GamePattern::random;
  if (text == "drift") return GamePattern::drift;
  if (text == "rotating") return GamePattern::rotating;
  throw ValidationError("unknown game pattern '" + text + "'");
}

std::vector<double> pattern_row(GamePattern pattern, std::size_t num_experts, std::size_t t,
                                LossMode mode, std::uint64_t seed) {
  std::vector<double> row(num_experts);
  const bool nonneg = mode == LossMode::nonnegative;
  if (pattern == GamePattern::rotating) {
    for (std::size_t i = 0; i < num_experts; ++i) row[i] = (t % num_experts == i) ? 0.0 : 1.0;
    if (num_experts == 1) row[0] = 1.0;
    if (!nonneg && t % 2 == 0) {
      for (double& x : row) x = 0.5 * x - 0.25;  // mixed signs on even steps
    }
  } else {
    Rng rng(RngSpec{seed, t});
    for (std::size_t i = 0; i < num_experts; ++i) {
      const double u = rng.uniform();
      row[i] = nonneg ? u : 2.0 * u - 1.0;
      if (pattern == GamePattern::drift) {
        // Expert i carries bias i/N: expert 1 is best on average.
        const double bias = static_cast<double>(i) / static_cast<double>(num_experts);
        row[i] = 0.5 * (row[i] + bias);
      }
    }
  }
  double m = 0.0;
  for (double x : row) m = std::max(m, std::abs(x));
  if (m == 0.0) {
    row[0] = 1.0;
    m = 1.0;
  }
  for (double& x : row) x /= m;
  return row;
}

LossMatrix fluc_bounded_game(std::size_t num_experts, std::size_t horizon,
                             const GammaSchedule& gamma, double v0, LossMode mode,
                             GamePattern pattern, std::uint64_t seed) {
  if (!(v0 > 0.0)) throw ValidationError("a fluctuation-bounded game needs v0 > 0");
  LossMatrix out(0, num_experts);
  Rng scale_rng(RngSpec{seed, 0xfeedULL});
  double v = v0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double g = gamma(t);
    if (!(g < 1.0)) throw ValidationError("fluctuation-bounded game needs gamma(t) < 1");
    const double u = 0.5 + 0.5 * scale_rng.uniform();
    // Shrink slightly so rounding in v_t never pushes fluc above gamma.
    const double dv = (1.0 - 1e-12) * u * g * v / (1.0 - g);
    auto row = pattern_row(pattern, num_experts, t, mode, seed);
    for (double& x : row) x *= dv;
    out.append_step(row);
    double m = 0.0;
    for (double x : row) m = std::max(m, std::abs(x));
    v += m;
  }
  return out;
}

LossMatrix envelope_game(std::size_t num_experts, std::size_t horizon,
                         const std::function<double(std::size_t)>& envelope, LossMode mode,
                         GamePattern pattern, std::uint64_t seed) {
  LossMatrix out(0, num_experts);
  for (std::size_t t = 1; t <= horizon; ++t) {
    auto row = pattern_row(pattern, num_experts, t, mode, seed);
    const double e = envelope(t);
    for (double& x : row) x *= e;
    out.append_step(row);
  }
  return out;
}

LossMatrix alternating_game(std::size_t horizon,
                            const std::function<double(std::size_t)>& envelope) {
  LossMatrix out(0, 2);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double e = envelope(t);
    const double s1 = t == 1 ? 0.5 : (t % 2 == 1 ? 1.0 : 0.0);
    const double s2 = t == 1 ? 0.0 : (t % 2 == 0 ? 1.0 : 0.0);
    const double row[2] = {s1 * e, s2 * e};
    out.append_step(row);
  }
  return out;
}

}  // namespace prot
