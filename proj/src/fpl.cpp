#include "prot/fpl.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "prot/errors.hpp"

namespace prot {

namespace {

void check_game(const LossMatrix& losses, const ScheduleParams& params) {
  if (losses.num_experts() != params.num_experts)
    throw ValidationError("schedule N = " + std::to_string(params.num_experts) +
                          " does not match the loss matrix (" +
                          std::to_string(losses.num_experts()) + " experts)");
}

StepRecord make_step(std::size_t t, std::size_t chosen, double loss, double cum_loss,
                     const GameState& state, double delta_v, double mu, LearningRate rate) {
  StepRecord s;
  s.t = t;
  s.chosen = chosen;
  s.loss = loss;
  s.cum_loss = cum_loss;
  s.volume = state.volume;
  s.delta_v = delta_v;
  s.fluc = scaled_fluctuation(std::min(delta_v, state.volume), state.volume);
  s.mu = mu;
  s.rate = rate;
  return s;
}

// Shared loop for PROT (decide before the step's losses) and IFPL (decide after).
template <class XiSource>
RunRecord run_loop(const LossMatrix& losses, const ScheduleParams& params, bool infeasible,
                   XiSource&& xi_for_step, bool record_xi) {
  check_game(losses, params);
  GameState state = GameState::initial(losses.num_experts(), params.v0);
  RunRecord record;
  record.steps.reserve(losses.num_steps());
  long double cum = 0.0L;
  for (std::size_t t = 1; t <= losses.num_steps(); ++t) {
    const double mu = mu_t(params, t);
    const auto row = losses.step(t);
    const double v_prev = state.volume;
    std::span<const double> xi = xi_for_step(t);
    LearningRate rate = LearningRate::infinite();
    std::size_t chosen = 0;
    if (infeasible) {
      update_state_in_place(state, row);
      rate = rate_from(mu, state.volume);
      chosen = prot_select(state.cumulative, rate, xi);
    } else {
      rate = rate_from(mu, v_prev);
      chosen = prot_select(state.cumulative, rate, xi);
      update_state_in_place(state, row);
    }
    cum += row[chosen];
    auto step = make_step(t, chosen, row[chosen], static_cast<double>(cum), state,
                          state.volume - v_prev, mu, rate);
    if (record_xi) step.perturbation.assign(xi.begin(), xi.end());
    record.steps.push_back(std::move(step));
  }
  return record;
}

RunRecord run_random(const LossMatrix& losses, const ScheduleParams& params, Rng& rng,
                     RunOptions options, bool infeasible) {
  std::vector<double> xi(losses.num_experts());
  if (options.regime == PerturbationRegime::once) sample_exponential(xi, rng);
  auto source = [&](std::size_t) -> std::span<const double> {
    if (options.regime == PerturbationRegime::per_step) sample_exponential(xi, rng);
    return xi;
  };
  return run_loop(losses, params, infeasible, source, options.record_perturbations);
}

}  // namespace

RunRecord prot_run(const LossMatrix& losses, const ScheduleParams& params, Rng& rng,
                   RunOptions options) {
  return run_random(losses, params, rng, options, false);
}

RunRecord ifpl_run(const LossMatrix& losses, const ScheduleParams& params, Rng& rng,
                   RunOptions options) {
  return run_random(losses, params, rng, options, true);
}

RunRecord prot_run_with(const LossMatrix& losses, const ScheduleParams& params,
                        const std::function<std::span<const double>(std::size_t t)>& xi_for_step) {
  return run_loop(losses, params, false, xi_for_step, true);
}

AdaptiveRun prot_run_adaptive(AdaptiveGame& game, std::size_t horizon,
                              const ScheduleParams& params, Rng& rng) {
  const std::size_t n = game.num_experts();
  if (n != params.num_experts) throw ValidationError("schedule N does not match the game");
  GameState state = GameState::initial(n, params.v0);
  AdaptiveRun out;
  out.realised_losses = LossMatrix(0, n);
  out.record.steps.reserve(horizon);
  std::vector<std::size_t> choices;
  choices.reserve(horizon);
  std::vector<double> xi(n);
  long double cum = 0.0L;
  long double expected = 0.0L;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double mu = mu_t(params, t);
    const double v_prev = state.volume;
    const auto rate = rate_from(mu, v_prev);
    // The adversary commits to this step's losses before seeing I_t.
    const std::vector<double> row = game.losses(t, choices);
    if (row.size() != n) throw ValidationError("adaptive game returned a row of the wrong length");
    const auto p = selection_probabilities_exact(state.cumulative, rate);
    for (std::size_t j = 0; j < n; ++j) expected += static_cast<long double>(p[j]) * row[j];
    sample_exponential(xi, rng);
    const std::size_t chosen = prot_select(state.cumulative, rate, xi);
    update_state_in_place(state, row);
    out.realised_losses.append_step(row);
    choices.push_back(chosen);
    cum += row[chosen];
    out.record.steps.push_back(make_step(t, chosen, row[chosen], static_cast<double>(cum), state,
                                         state.volume - v_prev, mu, rate));
  }
  out.expected_loss_sum = static_cast<double>(expected);
  return out;
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "t,chosen,loss,cum_loss,v,delta_v,fluc,mu,eps\n";
  for (const auto& s : record.steps) {
    out << s.t << ',' << s.chosen + 1 << ',' << s.loss << ',' << s.cum_loss << ',' << s.volume
        << ',' << s.delta_v << ',' << s.fluc << ',' << s.mu << ',';
    if (s.rate.is_infinite())
      out << "inf";
    else
      out << s.rate.value();
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace prot
