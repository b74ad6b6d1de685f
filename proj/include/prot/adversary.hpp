#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "prot/schedule.hpp"

namespace prot {

// Two-expert adaptive game that puts the whole step loss M_t = 4 v_{t-1} / eps
// on whichever expert the learner is more likely to follow.
struct AdversaryConfig {
  double eps = 0.5;  // in (0, 1)
  double v0 = 1.0;
  std::size_t horizon = 30;
};

struct AdversaryStep {
  double s1 = 0.0;
  double s2 = 0.0;
  double m = 0.0;
};

AdversaryStep prop1_step(double eps, double v_prev, double p1);

// What the learner sees before reporting P{I_t = 1}.
struct AdversaryHistory {
  std::size_t t = 0;  // step about to be played
  std::vector<double> s1, s2, p1;
  double cum1 = 0.0;
  double cum2 = 0.0;
  double volume = 0.0;  // v_{t-1}
};

using ProbabilityCallback = std::function<double(const AdversaryHistory&)>;

struct AdversaryRow {
  std::size_t t = 0;
  double m = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double p1 = 0.0;
  double expected_loss = 0.0;  // E(s_t)
  double volume = 0.0;
  double fluc = 0.0;
  double normalized_regret = 0.0;  // E(s_{1:t} - min_i s^i_{1:t}) / v_t
};

struct AdversaryTrace {
  AdversaryConfig config;
  std::vector<AdversaryRow> rows;
  double fluc_target() const { return 1.0 / (1.0 + config.eps / 4.0); }
  double regret_lower_bound() const { return 0.5 * (1.0 - config.eps); }
};

AdversaryTrace prop1_run(const ProbabilityCallback& algorithm, const AdversaryConfig& config);

// P{I_t = 1} of PROT against the adversary's history (schedule N must be 2).
ProbabilityCallback prot_probability_callback(const ScheduleParams& params);

// t,M_t,s1,s2,p1,E_loss,v,fluc,norm_regret_lb
void write_adversary_csv(std::ostream& out, const AdversaryTrace& trace);

}  // namespace prot
