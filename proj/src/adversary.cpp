#include "prot/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "prot/errors.hpp"
#include "prot/fpl.hpp"

namespace prot {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("adversary eps must lie in (0, 1)");
}

}  // namespace

AdversaryStep prop1_step(double eps, double v_prev, double p1) {
  check_eps(eps);
  if (!(v_prev > 0.0)) throw ValidationError("adversary needs v_{t-1} > 0");
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw ValidationError("probability outside [0, 1]");
  const double m = 4.0 * v_prev / eps;
  // The loss goes to the expert the learner favours, so E(s_t) >= M_t / 2.
  if (p1 >= 0.5) return {m, 0.0, m};
  return {0.0, m, m};
}

AdversaryTrace prop1_run(const ProbabilityCallback& algorithm, const AdversaryConfig& config) {
  check_eps(config.eps);
  if (!(config.v0 > 0.0)) throw ValidationError("adversary needs v0 > 0");
  AdversaryTrace trace;
  trace.config = config;
  AdversaryHistory history;
  history.volume = config.v0;
  long double expected_cum = 0.0L;
  const double fluc_target = trace.fluc_target();
  for (std::size_t t = 1; t <= config.horizon; ++t) {
    history.t = t;
    const double p1 = algorithm(history);
    if (!(p1 >= 0.0 && p1 <= 1.0))
      throw ValidationError("algorithm reported P{I_t=1} outside [0, 1] at step " + std::to_string(t));
    const auto step = prop1_step(config.eps, history.volume, p1);
    const double v_prev = history.volume;
    history.s1.push_back(step.s1);
    history.s2.push_back(step.s2);
    history.p1.push_back(p1);
    history.cum1 += step.s1;
    history.cum2 += step.s2;
    history.volume = v_prev + step.m;

    AdversaryRow row;
    row.t = t;
    row.m = step.m;
    row.s1 = step.s1;
    row.s2 = step.s2;
    row.p1 = p1;
    row.expected_loss = step.s1 * p1 + step.s2 * (1.0 - p1);
    expected_cum += row.expected_loss;
    row.volume = history.volume;
    row.fluc = scaled_fluctuation(step.m, history.volume);
    row.normalized_regret =
        static_cast<double>((expected_cum - std::min(history.cum1, history.cum2)) / history.volume);
    if (std::abs(row.fluc - fluc_target) > 8.0 * std::numeric_limits<double>::epsilon())
      throw std::logic_error("adversary fluctuation drifted from 1/(1+eps/4)");
    trace.rows.push_back(row);
  }
  return trace;
}

ProbabilityCallback prot_probability_callback(const ScheduleParams& params) {
  if (params.num_experts != 2) throw ValidationError("the adversary plays two experts");
  return [params](const AdversaryHistory& h) {
    const double mu = mu_t(params, h.t);
    const std::vector<double> cum{h.cum1, h.cum2};
    return selection_probabilities_exact(cum, rate_from(mu, h.volume))[0];
  };
}

void write_adversary_csv(std::ostream& out, const AdversaryTrace& trace) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "t,M_t,s1,s2,p1,E_loss,v,fluc,norm_regret_lb\n";
  for (const auto& r : trace.rows) {
    out << r.t << ',' << r.m << ',' << r.s1 << ',' << r.s2 << ',' << r.p1 << ','
        << r.expected_loss << ',' << r.volume << ',' << r.fluc << ',' << r.normalized_regret
        << '\n';
  }
  out.precision(old_precision);
}

}  // namespace prot
