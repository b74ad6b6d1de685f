#include "prot/perturbation.hpp"

#include <cmath>
#include <numbers>

#include "prot/errors.hpp"

namespace prot {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(RngSpec spec) : engine_(splitmix64(spec.seed ^ splitmix64(spec.stream_id + 1))) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::exponential() { return exponential_from_uniform(uniform()); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double exponential_from_uniform(double u) {
  if (!(u >= 0.0 && u < 1.0)) throw ValidationError("uniform variate must lie in [0, 1)");
  return -std::log1p(-u);
}

std::string to_string(PerturbationRegime regime) {
  return regime == PerturbationRegime::once ? "once" : "per-step";
}

PerturbationRegime regime_from_string(const std::string& text) {
  if (text == "once") return PerturbationRegime::once;
  if (text == "per-step" || text == "per_step") return PerturbationRegime::per_step;
  throw ValidationError("unknown perturbation regime '" + text + "' (expected once|per-step)");
}

void sample_exponential(std::span<double> out, Rng& rng) {
  for (double& x : out) x = rng.exponential();
}

PerturbationVector sample_exponential(std::size_t n, Rng& rng) {
  if (n == 0) throw ValidationError("need at least one perturbation");
  PerturbationVector xi(n);
  sample_exponential(xi, rng);
  return xi;
}

double max_tail_bound(std::size_t num_experts, double x) {
  if (!(x >= 0.0)) throw ValidationError("tail threshold must be >= 0");
  return static_cast<double>(num_experts) * std::exp(-x);
}

double expected_max_bound(std::size_t num_experts) {
  if (num_experts == 0) throw ValidationError("need at least one expert");
  return 1.0 + std::log(static_cast<double>(num_experts));
}

double harmonic_number(std::size_t n) {
  long double h = 0.0L;
  for (std::size_t k = n; k >= 1; --k) h += 1.0L / static_cast<long double>(k);
  return static_cast<double>(h);
}

}  // namespace prot
