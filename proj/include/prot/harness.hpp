#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prot/game.hpp"
#include "prot/montecarlo.hpp"
#include "prot/perturbation.hpp"
#include "prot/schedule.hpp"

namespace prot {

// Fully resolved experiment: the game is materialised, a and gamma are fixed.
struct ExperimentConfig {
  nlohmann::json game;  // source description, kept for the report
  LossMatrix losses;
  ScheduleParams schedule;
  double target_eps = 1.0;
  std::vector<RngSpec> seeds;
  PerturbationRegime regime = PerturbationRegime::per_step;
  bool with_ifpl = true;
  bool parallel = true;
  std::optional<std::string> out_dir;
  // Envelope exponent of polynomially bounded games; enables the polynomial bound.
  std::optional<double> envelope_alpha;
  std::size_t max_checkpoints = 256;
};

// Builds a config from JSON:
// {
//   "game": {"source": "csv", "path": ...}
//         | {"source": "fluc_bounded"|"envelope"|"alternating", "N", "T", "pattern",
//            "seed", "alpha" (envelope exponent), "v0"},
//   "schedule": {"a" | "target_eps", "gamma", "v0", "loss_mode"},   N comes from the game
//   "target_eps": 1.0,
//   "seeds": {"count": K, "base": B} | [s1, s2, ...],
//   "regime": "per-step" | "once", "ifpl": true, "out": "dir"
// }
// A power gamma given without a scale, or with "scale": "auto", is scaled to
// 0.9 min{A, 1/A} so the schedule is valid from t = 1.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

GammaSchedule resolve_gamma(const nlohmann::json& gamma, double a, std::size_t num_experts,
                            LossMode mode);

struct Criterion {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;  // added to rhs (3 standard errors)
  bool applicable = true;
  bool pass = false;
};

nlohmann::json to_json(const Criterion& c);

struct CheckpointRow {
  std::size_t t = 0;
  double mean_cum_loss = 0.0;
  double se_cum_loss = 0.0;
  double best_expert = 0.0;
  double mean_regret = 0.0;
  double volume = 0.0;
};

struct AggregateReport {
  nlohmann::json config;
  std::size_t num_seeds = 0;
  std::size_t num_steps = 0;
  std::size_t num_experts = 0;
  double best_expert_loss = 0.0;
  double final_volume = 0.0;
  SampleStats prot_loss;
  SampleStats prot_regret;
  std::optional<SampleStats> ifpl_regret;
  std::optional<SampleStats> prot_minus_ifpl;
  std::optional<double> exact_expected_regret;
  bool fluc_hypothesis = false;
  std::optional<std::size_t> fluc_first_violation;
  double tuned_bound = 0.0;
  double general_bound = 0.0;
  double fpl_ifpl_gap = 0.0;
  double ifpl_bound = 0.0;
  double ifpl_start_term = 0.0;
  std::optional<double> poly_bound;
  std::vector<Criterion> criteria;
  std::vector<CheckpointRow> checkpoints;

  bool all_pass() const;
};

AggregateReport run_experiment(const ExperimentConfig& config);
nlohmann::json to_json(const AggregateReport& report);
// report.json, trace.csv (first seed's PROT run), aggregate.csv
void write_experiment_outputs(const ExperimentConfig& config, const AggregateReport& report,
                              const std::string& dir);

struct Summability {
  bool passes = false;
  double partial_sum = 0.0;   // sum_{t<=T} gamma(t)^2
  double tail_estimate = 0.0; // bound on sum_{t>T}, infinite when divergent
  std::string note;
};

// Numerical test of sum gamma(t)^2 < infinity up to the horizon, with a tail
// bound for power schedules (convergent iff 2 delta > 1).
Summability check_summability(const GammaSchedule& gamma, std::size_t horizon);

struct HannanRow {
  std::size_t t = 0;
  double volume = 0.0;
  double single_trajectory = 0.0;  // (s_{1:t} - min_i s^i_{1:t}) / v_t for the first seed
  double seed_mean = 0.0;          // mean of the same over all seeds
  double exact_expected = 0.0;     // derandomised E(...) / v_t
};

struct HannanReport {
  Summability summability;
  std::vector<HannanRow> rows;  // checkpoints t = 2^k and T
  std::optional<std::string> warning;
};

HannanReport hannan_check(const ExperimentConfig& config);
nlohmann::json to_json(const HannanReport& report);

// Power-of-two checkpoints up to the horizon, always including the horizon.
std::vector<std::size_t> dyadic_checkpoints(std::size_t horizon);

}  // namespace prot
