// Command-line front end: run, verify-bounds, hannan, adversary, trading, probe.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prot/adversary.hpp"
#include "prot/errors.hpp"
#include "prot/fpl.hpp"
#include "prot/harness.hpp"
#include "prot/montecarlo.hpp"
#include "prot/volatility.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string losses_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;
  std::string regime;
  std::string gamma;
  std::optional<double> target_eps;
  std::string loss_mode;
  std::string out;
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--losses", f.losses_path, "loss-matrix CSV (expert_1,...,expert_N)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--seeds", f.seeds, "number of seeds")->check(CLI::PositiveNumber);
  cmd->add_option("--regime", f.regime, "perturbation regime")
      ->check(CLI::IsMember({"once", "per-step"}));
  cmd->add_option("--gamma", f.gamma, "power:DELTA[:SCALE] or const:C");
  cmd->add_option("--target-eps", f.target_eps, "target epsilon of the regret bound")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--loss-mode", f.loss_mode, "general or nonnegative")
      ->check(CLI::IsMember({"general", "nonnegative"}));
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--serial", f.serial, "use the serial Monte Carlo kernel");
}

json load_config(const CommonFlags& f) {
  json j = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    j = json::parse(in);
  }
  if (!f.losses_path.empty()) j["game"] = {{"source", "csv"}, {"path", f.losses_path}};
  if (!j.contains("schedule")) j["schedule"] = json::object();
  if (f.seed || f.seeds) {
    json seeds = j.value("seeds", json::object());
    if (!seeds.is_object()) seeds = json::object();
    if (f.seed) seeds["base"] = *f.seed;
    if (f.seeds) seeds["count"] = *f.seeds;
    j["seeds"] = seeds;
  }
  if (!f.regime.empty()) j["regime"] = f.regime;
  if (!f.gamma.empty()) j["schedule"]["gamma"] = f.gamma;
  if (f.target_eps) j["target_eps"] = *f.target_eps;
  if (!f.loss_mode.empty()) j["schedule"]["loss_mode"] = f.loss_mode;
  if (!f.out.empty()) j["out"] = f.out;
  if (f.serial) j["parallel"] = false;
  return j;
}

void print_criteria(const prot::AggregateReport& r) {
  std::cout << std::setprecision(6);
  std::cout << "seeds=" << r.num_seeds << " T=" << r.num_steps << " N=" << r.num_experts
            << " v_T=" << r.final_volume << " fluc<=gamma: " << (r.fluc_hypothesis ? "yes" : "no")
            << '\n';
  std::cout << "mean regret " << r.prot_regret.mean << " (se " << r.prot_regret.std_error << ")\n";
  for (const auto& c : r.criteria) {
    std::cout << (c.applicable ? (c.pass ? "PASS " : "FAIL ") : "SKIP ") << c.name << ": "
              << c.lhs << " <= " << c.rhs << " + " << c.tolerance << '\n';
  }
}

int cmd_run(const CommonFlags& f, bool verify) {
  json j = load_config(f);
  if (verify) j["ifpl"] = true;
  const auto cfg = prot::experiment_from_json(j);
  const auto report = prot::run_experiment(cfg);
  print_criteria(report);
  bool ok = report.all_pass();
  if (verify) {
    // Exact per-step check of the PROT/IFPL probability ratio along the game.
    const auto vs = prot::volume_series(cfg.losses, cfg.schedule.v0);
    prot::GameState state = prot::GameState::initial(cfg.losses.num_experts(), cfg.schedule.v0);
    std::size_t checked = 0, failed = 0;
    for (std::size_t t = 1; t <= cfg.losses.num_steps(); ++t) {
      const auto row = cfg.losses.step(t);
      const double v_prev = state.volume;
      if (v_prev > 0.0 && vs.fluc.values[t - 1] <= cfg.schedule.gamma(t) &&
          cfg.losses.num_experts() <= 12) {
        const auto r = prot::probability_ratio_check(state.cumulative, row, cfg.schedule, t,
                                                     v_prev, vs.volume[t - 1]);
        ++checked;
        if (!r.holds) ++failed;
      }
      prot::update_state_in_place(state, row);
    }
    std::cout << (failed == 0 ? "PASS " : "FAIL ") << "probability_ratio: " << checked
              << " steps checked, " << failed << " violations\n";
    ok = ok && failed == 0;
  }
  if (cfg.out_dir) {
    prot::write_experiment_outputs(cfg, report, *cfg.out_dir);
    std::cout << "wrote " << *cfg.out_dir << "/{report.json,trace.csv,aggregate.csv}\n";
  }
  return verify && !ok ? 1 : 0;
}

int cmd_hannan(const CommonFlags& f) {
  const auto cfg = prot::experiment_from_json(load_config(f));
  const auto rep = prot::hannan_check(cfg);
  if (rep.warning) std::cerr << "warning: " << *rep.warning << '\n';
  std::cout << "summability: " << (rep.summability.passes ? "pass" : "fail") << " ("
            << rep.summability.note << ")\n";
  std::cout << "t,v,single_trajectory,seed_mean,exact_expected\n" << std::setprecision(8);
  for (const auto& r : rep.rows) {
    std::cout << r.t << ',' << r.volume << ',' << r.single_trajectory << ',' << r.seed_mean
              << ',' << r.exact_expected << '\n';
  }
  if (cfg.out_dir) {
    fs::create_directories(*cfg.out_dir);
    std::ofstream out(fs::path(*cfg.out_dir) / "hannan.json");
    json j = prot::to_json(rep);
    j["config"] = prot::to_json(cfg);
    out << j.dump(2) << '\n';
  }
  return 0;
}

struct AdversaryFlags {
  double eps = 0.5;
  std::size_t horizon = 30;
  std::string algorithm = "prot";
  std::string gamma = "const:0.01";
  std::optional<double> target_eps;
  std::string out;
};

int cmd_adversary(const AdversaryFlags& f) {
  prot::AdversaryConfig cfg{f.eps, 1.0, f.horizon};
  prot::ProbabilityCallback algorithm;
  if (f.algorithm == "uniform") {
    algorithm = [](const prot::AdversaryHistory&) { return 0.5; };
  } else {
    prot::ScheduleParams params;
    params.num_experts = 2;
    params.a = prot::choose_a(f.target_eps.value_or(1.0), prot::LossMode::general);
    params.gamma = prot::resolve_gamma(json(f.gamma), params.a, 2, prot::LossMode::general);
    params.v0 = cfg.v0;
    algorithm = prot::prot_probability_callback(params);
  }
  const auto trace = prot::prop1_run(algorithm, cfg);
  bool ok = true;
  for (const auto& r : trace.rows) ok = ok && r.normalized_regret >= trace.regret_lower_bound();
  if (f.out.empty()) {
    prot::write_adversary_csv(std::cout, trace);
  } else {
    fs::create_directories(f.out);
    std::ofstream out(fs::path(f.out) / "adversary.csv");
    prot::write_adversary_csv(out, trace);
    std::cout << "wrote " << f.out << "/adversary.csv\n";
  }
  std::cerr << "fluc(t) = " << trace.fluc_target() << " every step; normalized regret >= "
            << trace.regret_lower_bound() << ": " << (ok ? "yes" : "no") << '\n';
  return 0;
}

struct TradingFlags {
  std::string prices;
  double hurst = 0.8;
  std::size_t steps = 4096;
  double scale = 1.0;
  double drift = 0.0;
  double s0 = 100.0;
  std::uint64_t path_seed = 0;
  double c = 1.0;
  double mu = 0.0;
  double target_eps = 1.0;
  double v0 = 1.0;
  std::size_t mc_seeds = 0;
  std::string out;
};

int cmd_trading(const TradingFlags& f) {
  prot::PriceSeries prices;
  if (!f.prices.empty()) {
    prices = prot::read_price_csv_file(f.prices);
  } else {
    prices = prot::fbm_generate({f.hurst, f.steps, f.scale, f.drift, f.s0, f.path_seed});
  }
  prot::TradingConfig cfg;
  cfg.c = f.c;
  cfg.target_eps = f.target_eps;
  cfg.schedule.num_experts = 2;
  cfg.schedule.a = prot::choose_a(f.target_eps, prot::LossMode::general);
  cfg.schedule.v0 = f.v0;
  const double mu = f.mu > 0.0 ? f.mu : 0.9 * prot::schedule_constants(cfg.schedule).limit();
  cfg.schedule.gamma = prot::GammaSchedule::constant(mu);
  const auto report = prot::run_trading_experiment(cfg, prices);

  json j = {{"source", prices.source},
            {"M", prices.num_increments()},
            {"C", cfg.c},
            {"schedule", prot::to_json(cfg.schedule)},
            {"target_eps", cfg.target_eps},
            {"identity_residual", report.identity.residual},
            {"identity_ok", report.identity.within_tolerance},
            {"learner_gain", report.defensive_lhs},
            {"defensive_rhs", report.defensive_rhs},
            {"defensive_holds", report.defensive_holds},
            {"fluc_violations", report.fluc_violations.size()}};
  if (!report.fluc_violations.empty()) j["first_fluc_violation"] = report.fluc_violations.front();
  if (f.mc_seeds > 0) {
    const auto losses = prot::gains_as_losses(prot::expert_gains(prices, cfg.c));
    const auto plan = prot::make_plan(losses, cfg.schedule);
    const auto seeds = prot::seed_streams(f.path_seed, f.mc_seeds);
    const auto batch = prot::simulate_seeds_parallel(plan, seeds, {});
    const auto stats = prot::summarize(batch.prot_loss);
    j["mc_gain_mean"] = -stats.mean;
    j["mc_gain_se"] = stats.std_error;
  }
  std::cout << j.dump(2) << '\n';
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    std::ofstream csv(fs::path(f.out) / "trading.csv");
    prot::write_trading_csv(csv, report);
    std::ofstream rep(fs::path(f.out) / "report.json");
    rep << j.dump(2) << '\n';
  }
  return 0;
}

struct ProbeFlags {
  std::string cumulative = "3,5";
  double eps = 0.5;
  std::size_t samples = 1000000;
  std::uint64_t seed = 0;
};

int cmd_probe(const ProbeFlags& f) {
  std::vector<double> cum;
  std::stringstream ss(f.cumulative);
  std::string cell;
  while (std::getline(ss, cell, ',')) cum.push_back(std::stod(cell));
  const auto rate = prot::LearningRate::finite(f.eps);
  const auto exact = prot::selection_probabilities_exact(cum, rate);
  prot::Rng rng({f.seed, 0});
  const auto mc = prot::selection_probabilities_mc(cum, rate, f.samples, rng);
  std::cout << "expert,exact,mc,binomial_se,z\n" << std::setprecision(10);
  for (std::size_t i = 0; i < cum.size(); ++i) {
    const double se = std::sqrt(exact[i] * (1.0 - exact[i]) / static_cast<double>(f.samples));
    std::cout << i + 1 << ',' << exact[i] << ',' << mc[i] << ',' << se << ','
              << (se > 0 ? (mc[i] - exact[i]) / se : 0.0) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Follow-the-perturbed-leader with volume-scaled learning rates"};
  app.require_subcommand(1);

  CommonFlags run_flags, verify_flags, hannan_flags;
  auto* run = app.add_subcommand("run", "Monte Carlo experiment with bound report");
  add_common(run, run_flags);
  auto* verify = app.add_subcommand("verify-bounds", "check the regret bounds; exit 1 on failure");
  add_common(verify, verify_flags);
  auto* hannan = app.add_subcommand("hannan", "normalized regret at dyadic checkpoints");
  add_common(hannan, hannan_flags);

  AdversaryFlags adv;
  auto* adversary = app.add_subcommand("adversary", "two-expert lower-bound adversary trace");
  adversary->add_option("--eps", adv.eps, "adversary epsilon in (0,1)")->check(CLI::Range(0.0, 1.0));
  adversary->add_option("--horizon", adv.horizon, "number of steps");
  adversary->add_option("--algorithm", adv.algorithm)->check(CLI::IsMember({"prot", "uniform"}));
  adversary->add_option("--gamma", adv.gamma, "schedule of the PROT learner");
  adversary->add_option("--target-eps", adv.target_eps, "target epsilon used to choose a");
  adversary->add_option("--out", adv.out, "output directory");

  TradingFlags tr;
  auto* trading = app.add_subcommand("trading", "zero-sum volatility experts and the PROT mixture");
  trading->add_option("--prices", tr.prices, "price CSV (column `price`)")->check(CLI::ExistingFile);
  trading->add_option("--hurst", tr.hurst, "Hurst exponent of the generated fBm path");
  trading->add_option("--steps", tr.steps, "number of price increments M");
  trading->add_option("--scale", tr.scale);
  trading->add_option("--drift", tr.drift);
  trading->add_option("--s0", tr.s0, "initial price");
  trading->add_option("--path-seed", tr.path_seed);
  trading->add_option("--C", tr.c, "position-scaling constant");
  trading->add_option("--mu", tr.mu, "constant gamma; default 0.9 min{A,1/A}");
  trading->add_option("--target-eps", tr.target_eps);
  trading->add_option("--v0", tr.v0);
  trading->add_option("--mc-seeds", tr.mc_seeds, "also estimate the gain by Monte Carlo");
  trading->add_option("--out", tr.out, "output directory");

  ProbeFlags pr;
  auto* probe = app.add_subcommand("probe", "exact vs Monte Carlo selection probabilities");
  probe->add_option("--cum", pr.cumulative, "comma-separated cumulative losses");
  probe->add_option("--eps", pr.eps, "learning rate")->check(CLI::PositiveNumber);
  probe->add_option("--samples", pr.samples)->check(CLI::PositiveNumber);
  probe->add_option("--seed", pr.seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags, false);
    if (*verify) return cmd_run(verify_flags, true);
    if (*hannan) return cmd_hannan(hannan_flags);
    if (*adversary) return cmd_adversary(adv);
    if (*trading) return cmd_trading(tr);
    if (*probe) return cmd_probe(pr);
  } catch (const prot::ScheduleError& e) {
    std::cerr << "schedule error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
