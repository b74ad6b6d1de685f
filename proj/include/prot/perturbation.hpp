#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace prot {

struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Deterministic per-(seed, stream) generator. Uniforms are built from the top
// 53 bits of mt19937_64 so streams are identical on every platform.
class Rng {
 public:
  explicit Rng(RngSpec spec);

  // U in [0, 1)
  double uniform();
  // Exp(1) by inverse CDF.
  double exponential();
  // N(0, 1) by Box-Muller.
  double normal();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// xi = -ln(1 - u)
double exponential_from_uniform(double u);

enum class PerturbationRegime { once, per_step };

std::string to_string(PerturbationRegime regime);
PerturbationRegime regime_from_string(const std::string& text);

using PerturbationVector = std::vector<double>;

PerturbationVector sample_exponential(std::size_t n, Rng& rng);
void sample_exponential(std::span<double> out, Rng& rng);

// P{max_i xi^i >= x} <= N e^{-x}
double max_tail_bound(std::size_t num_experts, double x);
// E max_i xi^i <= 1 + ln N
double expected_max_bound(std::size_t num_experts);
// H_N = sum_{k<=N} 1/k, the exact E max of N i.i.d. Exp(1).
double harmonic_number(std::size_t n);

}  // namespace prot
