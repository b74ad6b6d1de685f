#include "prot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "prot/errors.hpp"
#include "prot/fpl.hpp"
#include "prot/games.hpp"

namespace prot {

namespace {

std::vector<std::size_t> even_checkpoints(std::size_t horizon, std::size_t max_points) {
  std::vector<std::size_t> out;
  if (horizon == 0 || max_points == 0) return out;
  const std::size_t count = std::min(horizon, max_points);
  for (std::size_t k = 1; k <= count; ++k) {
    const std::size_t t = (k * horizon + count - 1) / count;
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

// Cumulative loss of every expert after step t, for each requested t.
std::vector<double> best_expert_at(const LossMatrix& losses, const std::vector<std::size_t>& ts) {
  std::vector<double> out;
  out.reserve(ts.size());
  std::vector<long double> cum(losses.num_experts(), 0.0L);
  std::size_t next = 0;
  for (std::size_t t = 1; t <= losses.num_steps() && next < ts.size(); ++t) {
    const auto row = losses.step(t);
    for (std::size_t i = 0; i < row.size(); ++i) cum[i] += row[i];
    while (next < ts.size() && ts[next] == t) {
      out.push_back(static_cast<double>(*std::min_element(cum.begin(), cum.end())));
      ++next;
    }
  }
  return out;
}

std::vector<RngSpec> seeds_from_json(const nlohmann::json& j) {
  if (j.is_null()) return seed_streams(0, 100);
  if (j.is_array()) {
    std::vector<RngSpec> seeds;
    for (const auto& s : j) seeds.push_back(RngSpec{s.get<std::uint64_t>(), 0});
    if (seeds.empty()) throw ValidationError("seed list is empty");
    return seeds;
  }
  const auto count = j.value("count", std::size_t{100});
  if (count == 0) throw ValidationError("seed count must be >= 1");
  return seed_streams(j.value("base", std::uint64_t{0}), count);
}

Criterion make_criterion(std::string name, double lhs, double rhs, double tolerance,
                         bool applicable) {
  Criterion c{std::move(name), lhs, rhs, tolerance, applicable, false};
  c.pass = lhs <= rhs + tolerance;
  return c;
}

nlohmann::json stats_json(const SampleStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"stddev", s.stddev}, {"se", s.std_error}};
}

}  // namespace

GammaSchedule resolve_gamma(const nlohmann::json& gamma, double a, std::size_t num_experts,
                            LossMode mode) {
  const double auto_scale = 0.9 * schedule_constants(a, num_experts, mode).limit();
  if (gamma.is_string()) {
    const auto text = gamma.get<std::string>();
    const auto parsed = GammaSchedule::parse(text);
    const bool explicit_scale = std::count(text.begin(), text.end(), ':') == 2;
    if (const auto* p = std::get_if<GammaSchedule::Power>(&parsed.kind()); p && !explicit_scale)
      return GammaSchedule::power(p->delta, std::min(1.0, auto_scale));
    return parsed;
  }
  if (gamma.is_object() && gamma.value("kind", std::string()) == "power") {
    const auto scale = gamma.find("scale");
    if (scale == gamma.end() || (scale->is_string() && scale->get<std::string>() == "auto"))
      return GammaSchedule::power(gamma.at("delta").get<double>(), std::min(1.0, auto_scale));
  }
  return gamma_from_json(gamma);
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  const nlohmann::json sched = j.value("schedule", nlohmann::json::object());
  const nlohmann::json game = j.value("game", nlohmann::json::object());
  cfg.target_eps = j.value("target_eps", sched.value("target_eps", 1.0));
  if (!(cfg.target_eps > 0.0)) throw ValidationError("target_eps must be positive");
  cfg.schedule.loss_mode = loss_mode_from_string(sched.value("loss_mode", std::string("general")));
  cfg.schedule.a = sched.contains("a") ? sched.at("a").get<double>()
                                       : choose_a(cfg.target_eps, cfg.schedule.loss_mode);
  cfg.schedule.v0 = sched.value("v0", game.value("v0", 0.0));

  const std::string source = game.value("source", std::string("csv"));
  if (source == "csv") {
    cfg.losses = read_loss_csv_file(game.at("path").get<std::string>());
  }
  cfg.schedule.num_experts =
      source == "csv" ? cfg.losses.num_experts()
                      : (source == "alternating" ? 2 : game.value("N", std::size_t{2}));
  cfg.schedule.gamma = resolve_gamma(sched.value("gamma", nlohmann::json("power:1")),
                                     cfg.schedule.a, cfg.schedule.num_experts,
                                     cfg.schedule.loss_mode);

  validate_schedule(cfg.schedule);

  if (source != "csv") {
    const std::size_t T = game.value("T", std::size_t{1000});
    const auto pattern = pattern_from_string(game.value("pattern", std::string("random")));
    const std::uint64_t seed = game.value("seed", std::uint64_t{0});
    const std::size_t N = cfg.schedule.num_experts;
    if (source == "fluc_bounded") {
      if (!(cfg.schedule.v0 > 0.0)) cfg.schedule.v0 = 1.0;
      cfg.losses = fluc_bounded_game(N, T, cfg.schedule.gamma, cfg.schedule.v0,
                                     cfg.schedule.loss_mode, pattern, seed);
    } else if (source == "envelope") {
      const double alpha = game.value("alpha", 0.0);
      cfg.envelope_alpha = alpha;
      cfg.losses = envelope_game(
          N, T, [alpha](std::size_t t) { return std::pow(static_cast<double>(t), alpha); },
          cfg.schedule.loss_mode, pattern, seed);
    } else if (source == "alternating") {
      const double alpha = game.value("alpha", 0.0);
      cfg.envelope_alpha = alpha;
      cfg.losses = alternating_game(
          T, [alpha](std::size_t t) { return std::pow(static_cast<double>(t), alpha); });
    } else {
      throw ValidationError("unknown game source '" + source + "'");
    }
  }
  cfg.game = game;
  cfg.seeds = seeds_from_json(j.contains("seeds") ? j.at("seeds") : nlohmann::json());
  cfg.regime = regime_from_string(j.value("regime", std::string("per-step")));
  cfg.with_ifpl = j.value("ifpl", true);
  cfg.parallel = j.value("parallel", true);
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : config.seeds) seeds.push_back({s.seed, s.stream_id});
  nlohmann::json j = {{"game", config.game},
                      {"num_steps", config.losses.num_steps()},
                      {"num_experts", config.losses.num_experts()},
                      {"schedule", to_json(config.schedule)},
                      {"target_eps", config.target_eps},
                      {"seeds", seeds},
                      {"regime", to_string(config.regime)},
                      {"ifpl", config.with_ifpl}};
  if (config.envelope_alpha) j["envelope_alpha"] = *config.envelope_alpha;
  return j;
}

nlohmann::json to_json(const Criterion& c) {
  return {{"name", c.name},           {"lhs", c.lhs},   {"rhs", c.rhs},
          {"tolerance", c.tolerance}, {"pass", c.pass}, {"applicable", c.applicable}};
}

bool AggregateReport::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const Criterion& c) { return !c.applicable || c.pass; });
}

AggregateReport run_experiment(const ExperimentConfig& config) {
  if (config.seeds.empty()) throw ValidationError("need at least one seed");
  const GamePlan plan = make_plan(config.losses, config.schedule);
  MonteCarloOptions opts;
  opts.regime = config.regime;
  opts.with_ifpl = config.with_ifpl;
  opts.checkpoints = even_checkpoints(plan.num_steps, config.max_checkpoints);
  const SeedBatch batch = config.parallel ? simulate_seeds_parallel(plan, config.seeds, opts)
                                          : simulate_seeds_serial(plan, config.seeds, opts);

  AggregateReport r;
  r.config = to_json(config);
  r.num_seeds = batch.num_seeds;
  r.num_steps = plan.num_steps;
  r.num_experts = plan.num_experts;
  r.best_expert_loss = plan.best_expert_loss;
  r.final_volume = plan.volume.volume.empty() ? config.schedule.v0 : plan.volume.volume.back();
  r.prot_loss = summarize(batch.prot_loss);

  std::vector<double> regret(batch.num_seeds);
  for (std::size_t k = 0; k < regret.size(); ++k) regret[k] = batch.prot_loss[k] - plan.best_expert_loss;
  r.prot_regret = summarize(regret);
  if (config.with_ifpl) {
    std::vector<double> ifpl(batch.num_seeds), diff(batch.num_seeds);
    for (std::size_t k = 0; k < ifpl.size(); ++k) {
      ifpl[k] = batch.ifpl_loss[k] - plan.best_expert_loss;
      diff[k] = batch.prot_loss[k] - batch.ifpl_loss[k];
    }
    r.ifpl_regret = summarize(ifpl);
    r.prot_minus_ifpl = summarize(diff);
  }
  if (plan.num_experts <= 12)
    r.exact_expected_regret = expected_loss_exact(config.losses, config.schedule) - plan.best_expert_loss;

  const auto fluc = check_fluctuation_bound(plan.volume.fluc, config.schedule.gamma);
  r.fluc_hypothesis = fluc.holds;
  r.fluc_first_violation = fluc.first_violation;
  const auto& dv = plan.volume.delta_v;
  r.tuned_bound = regret_bound(config.schedule, dv, config.target_eps);
  r.general_bound = general_bound(config.schedule, dv);
  r.fpl_ifpl_gap = fpl_ifpl_gap_bound(config.schedule, dv);
  r.ifpl_bound = ifpl_regret_bound(config.schedule, dv);
  r.ifpl_start_term = ifpl_start_term(config.schedule, dv);

  const double limit = (config.schedule.loss_mode == LossMode::general ? 6.0 : 2.0) + config.target_eps;
  const bool a_tuned = a_objective(config.schedule.a, config.schedule.loss_mode) < limit;
  r.criteria.push_back(make_criterion("tuned_regret_bound", r.prot_regret.mean, r.tuned_bound,
                                      3.0 * r.prot_regret.std_error, r.fluc_hypothesis && a_tuned));
  r.criteria.push_back(make_criterion("general_bound", r.prot_regret.mean, r.general_bound,
                                      3.0 * r.prot_regret.std_error, r.fluc_hypothesis));
  if (config.with_ifpl) {
    r.criteria.push_back(make_criterion("fpl_ifpl_gap", r.prot_minus_ifpl->mean,
                                        r.fpl_ifpl_gap, 3.0 * r.prot_minus_ifpl->std_error,
                                        r.fluc_hypothesis));
    r.criteria.push_back(make_criterion("ifpl_regret", r.ifpl_regret->mean, r.ifpl_bound,
                                        3.0 * r.ifpl_regret->std_error, r.fluc_hypothesis));
    if (config.schedule.v0 > 0.0)
      r.criteria.push_back(make_criterion("ifpl_regret_with_start", r.ifpl_regret->mean,
                                          r.ifpl_bound + r.ifpl_start_term,
                                          3.0 * r.ifpl_regret->std_error, r.fluc_hypothesis));
  }
  if (config.envelope_alpha) {
    if (const auto* p = std::get_if<GammaSchedule::Power>(&config.schedule.gamma.kind())) {
      r.poly_bound = poly_bound(plan.num_experts, static_cast<double>(plan.num_steps),
                                *config.envelope_alpha, p->delta, config.target_eps);
      r.criteria.push_back(make_criterion("poly_envelope_bound", r.prot_regret.mean, *r.poly_bound,
                                          3.0 * r.prot_regret.std_error,
                                          r.fluc_hypothesis && a_tuned));
    }
  }

  const auto best = best_expert_at(config.losses, opts.checkpoints);
  const std::size_t m = opts.checkpoints.size();
  std::vector<double> column(batch.num_seeds);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t k = 0; k < batch.num_seeds; ++k) column[k] = batch.checkpoint_loss[k * m + c];
    const auto s = summarize(column);
    const std::size_t t = opts.checkpoints[c];
    r.checkpoints.push_back({t, s.mean, s.std_error, best[c], s.mean - best[c],
                             plan.volume.volume[t - 1]});
  }
  return r;
}

nlohmann::json to_json(const AggregateReport& r) {
  nlohmann::json criteria = nlohmann::json::array();
  for (const auto& c : r.criteria) criteria.push_back(to_json(c));
  nlohmann::json j = {{"config", r.config},
                      {"num_seeds", r.num_seeds},
                      {"num_steps", r.num_steps},
                      {"num_experts", r.num_experts},
                      {"best_expert_loss", r.best_expert_loss},
                      {"final_volume", r.final_volume},
                      {"prot_loss", stats_json(r.prot_loss)},
                      {"prot_regret", stats_json(r.prot_regret)},
                      {"fluc_hypothesis", r.fluc_hypothesis},
                      {"bounds",
                       {{"tuned", r.tuned_bound},
                        {"general", r.general_bound},
                        {"fpl_ifpl_gap", r.fpl_ifpl_gap},
                        {"ifpl", r.ifpl_bound},
                        {"ifpl_start_term", r.ifpl_start_term}}},
                      {"criteria", criteria},
                      {"all_pass", r.all_pass()}};
  if (r.fluc_first_violation) j["fluc_first_violation"] = *r.fluc_first_violation;
  if (r.ifpl_regret) j["ifpl_regret"] = stats_json(*r.ifpl_regret);
  if (r.prot_minus_ifpl) j["prot_minus_ifpl"] = stats_json(*r.prot_minus_ifpl);
  if (r.exact_expected_regret) j["exact_expected_regret"] = *r.exact_expected_regret;
  if (r.poly_bound) j["bounds"]["poly_envelope"] = *r.poly_bound;
  return j;
}

void write_experiment_outputs(const ExperimentConfig& config, const AggregateReport& report,
                              const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "report.json");
    out << to_json(report).dump(2) << '\n';
  }
  {
    Rng rng(config.seeds.front());
    RunOptions opts;
    opts.regime = config.regime;
    std::ofstream out(fs::path(dir) / "trace.csv");
    write_run_csv(out, prot_run(config.losses, config.schedule, rng, opts));
  }
  {
    std::ofstream out(fs::path(dir) / "aggregate.csv");
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "t,mean_cum_loss,se_cum_loss,best_expert,mean_regret,v\n";
    for (const auto& c : report.checkpoints) {
      out << c.t << ',' << c.mean_cum_loss << ',' << c.se_cum_loss << ',' << c.best_expert << ','
          << c.mean_regret << ',' << c.volume << '\n';
    }
  }
}

Summability check_summability(const GammaSchedule& gamma, std::size_t horizon) {
  Summability s;
  const std::size_t end = std::min(horizon, gamma.domain_end());
  long double partial = 0.0L;
  for (std::size_t t = 1; t <= end; ++t) {
    const long double g = gamma(t);
    partial += g * g;
  }
  s.partial_sum = static_cast<double>(partial);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GammaSchedule::Power>) {
          if (2.0 * k.delta > 1.0) {
            const double T = static_cast<double>(std::max<std::size_t>(end, 1));
            s.tail_estimate = k.scale * k.scale * std::pow(T, 1.0 - 2.0 * k.delta) / (2.0 * k.delta - 1.0);
            s.passes = true;
            s.note = "power schedule with delta > 1/2: sum of gamma^2 converges";
          } else {
            s.tail_estimate = std::numeric_limits<double>::infinity();
            s.note = "power schedule with delta <= 1/2: sum of gamma^2 diverges";
          }
        } else if constexpr (std::is_same_v<K, GammaSchedule::Constant>) {
          s.tail_estimate = std::numeric_limits<double>::infinity();
          s.note = "constant schedule: sum of gamma^2 diverges";
        } else {
          s.passes = true;
          s.note = "table schedule: finite domain, summability holds only up to its end";
        }
      },
      gamma.kind());
  return s;
}

std::vector<std::size_t> dyadic_checkpoints(std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t <= horizon; t *= 2) out.push_back(t);
  if (horizon > 0 && out.back() != horizon) out.push_back(horizon);
  return out;
}

HannanReport hannan_check(const ExperimentConfig& config) {
  HannanReport rep;
  const std::size_t T = config.losses.num_steps();
  rep.summability = check_summability(config.schedule.gamma, T);
  if (!rep.summability.passes) rep.warning = "gamma fails the summability test: " + rep.summability.note;

  const auto checkpoints = dyadic_checkpoints(T);
  const auto best = best_expert_at(config.losses, checkpoints);
  const GamePlan plan = make_plan(config.losses, config.schedule);
  MonteCarloOptions opts;
  opts.regime = config.regime;
  opts.checkpoints = checkpoints;
  const SeedBatch batch = config.parallel ? simulate_seeds_parallel(plan, config.seeds, opts)
                                          : simulate_seeds_serial(plan, config.seeds, opts);
  const auto exact = expected_cumulative_loss_exact(config.losses, config.schedule);

  const std::size_t m = checkpoints.size();
  std::vector<double> column(batch.num_seeds);
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t t = checkpoints[c];
    const double v = plan.volume.volume[t - 1];
    for (std::size_t k = 0; k < batch.num_seeds; ++k)
      column[k] = (batch.checkpoint_loss[k * m + c] - best[c]) / v;
    HannanRow row;
    row.t = t;
    row.volume = v;
    row.single_trajectory = column[0];
    row.seed_mean = summarize(column).mean;
    row.exact_expected = (exact[t - 1] - best[c]) / v;
    rep.rows.push_back(row);
  }
  return rep;
}

nlohmann::json to_json(const HannanReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"t", r.t},
                    {"v", r.volume},
                    {"single_trajectory", r.single_trajectory},
                    {"seed_mean", r.seed_mean},
                    {"exact_expected", r.exact_expected}});
  }
  nlohmann::json j = {{"summability",
                       {{"passes", report.summability.passes},
                        {"partial_sum", report.summability.partial_sum},
                        {"tail_estimate", std::isfinite(report.summability.tail_estimate)
                                              ? nlohmann::json(report.summability.tail_estimate)
                                              : nlohmann::json("inf")},
                        {"note", report.summability.note}}},
                      {"checkpoints", rows}};
  if (report.warning) j["warning"] = *report.warning;
  return j;
}

}  // namespace prot
