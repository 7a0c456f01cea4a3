// fairflow CLI: train policies, evaluate scenarios, run hyperparameter
// sweeps and export plot-ready series. Every output directory gets a
// manifest.json sufficient to re-run the exact command; files are written
// atomically (temp + rename). Exit code 0 iff all requested work completed.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairflow/cache.hpp"
#include "fairflow/checkpoint.hpp"
#include "fairflow/metrics.hpp"
#include "fairflow/ppo.hpp"
#include "fairflow/scenarios.hpp"
#include "fairflow/sim_json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace fairflow;

namespace {

constexpr const char* kToolVersion = "fairflow 0.1.0";

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const ordered_json& config, std::uint64_t seed,
                    const std::vector<std::string>& checkpoints) {
  ordered_json m;
  m["command"] = command;
  m["config"] = config;
  m["seed"] = seed;
  m["checkpoints"] = checkpoints;
  m["out_dir"] = out_dir.string();
  m["tool_version"] = kToolVersion;
  write_file_atomic(out_dir / "manifest.json", m.dump(2) + "\n");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

fs::path cache_root(const std::string& out_dir) {
  if (const char* env = std::getenv("FAIRFLOW_CACHE")) return fs::path(env);
  return fs::path(out_dir) / "cache";
}

struct EgoSpec {
  bool is_cubic = false;
  std::optional<PolicyCheckpoint> ckpt;
  ControllerFactory factory() const {
    if (is_cubic) return cubic_factory();
    return policy_factory(*ckpt);
  }
};

EgoSpec load_ego(const std::string& spec) {
  EgoSpec ego;
  if (spec == "cubic") {
    ego.is_cubic = true;
  } else {
    ego.ckpt = load_checkpoint(spec);
  }
  return ego;
}

std::string series_csv(const EpisodeSeries& series) {
  std::ostringstream out;
  out << "time_s";
  for (std::size_t f = 0; f < series.tput_mbps.size(); ++f) out << ",flow" << f << "_mbps";
  out << ",capacity_mbps\n";
  const std::size_t steps = series.capacity_mbps.size();
  for (std::size_t t = 0; t < steps; ++t) {
    out << format_double(static_cast<double>(t) * series.mi_duration_s);
    for (const auto& flow : series.tput_mbps) out << ',' << format_double(flow[t]);
    out << ',' << format_double(series.capacity_mbps[t]) << '\n';
  }
  return out.str();
}

// ---- train ----

int cmd_train(const std::string& strategy_str, double lambda, double loss_coef,
              long long steps, std::uint64_t seed, const std::string& out_dir,
              const std::string& frozen_base, bool lambda_set, bool loss_set,
              int episode_len) {
  TrainConfig cfg;
  cfg.strategy = strategy_from_name(strategy_str);
  cfg.total_steps = steps;
  cfg.seed = seed;
  cfg.episode_len = episode_len;
  if (lambda_set && cfg.strategy != Strategy::kA) {
    throw CLI::ValidationError("--lambda only applies to strategy a");
  }
  if (loss_set && cfg.strategy != Strategy::kC) {
    throw CLI::ValidationError("--loss-coef only applies to strategy c");
  }
  if (cfg.strategy == Strategy::kA) cfg.lambda = lambda;
  if (cfg.strategy == Strategy::kC) cfg.loss_coef = loss_coef;
  const bool needs_frozen =
      cfg.strategy == Strategy::kA || cfg.strategy == Strategy::kB;
  if (needs_frozen && frozen_base.empty()) {
    throw CLI::ValidationError("strategies a/b require --frozen-base <checkpoint>");
  }
  if (!needs_frozen && !frozen_base.empty()) {
    throw CLI::ValidationError("--frozen-base only applies to strategies a/b");
  }
  cfg.frozen_base_path = frozen_base;

  const TrainResult result = train(cfg);
  const fs::path out(out_dir);
  fs::create_directories(out);
  save_checkpoint(result.checkpoint, (out / "checkpoint.json").string());
  std::ostringstream curve;
  curve << "step,mean_episode_reward\n";
  for (const auto& p : result.curve) curve << p.step << ',' << p.mean_episode_reward << '\n';
  write_file_atomic(out / "curve.csv", curve.str());

  ordered_json cfg_json;
  cfg_json["strategy"] = strategy_str;
  cfg_json["lambda"] = cfg.lambda;
  cfg_json["loss_coef"] = cfg.loss_coef;
  cfg_json["steps"] = cfg.total_steps;
  cfg_json["episode_len"] = cfg.episode_len;
  cfg_json["frozen_base"] = frozen_base;
  write_manifest(out, "train", cfg_json, seed, {(out / "checkpoint.json").string()});
  std::cout << "trained " << strategy_str << " for " << result.checkpoint.steps_trained
            << " steps -> " << (out / "checkpoint.json").string() << "\n";
  return 0;
}

// ---- eval ----

int cmd_eval(const std::string& scenario, const std::string& ego_spec,
             const std::string& bg_spec, int episodes, int stagger,
             std::uint64_t seed, const std::string& out_dir, int episode_len) {
  const fs::path out(out_dir);
  fs::create_directories(out);
  std::vector<std::string> ckpts;
  if (ego_spec != "cubic") ckpts.push_back(ego_spec);
  if (!bg_spec.empty() && bg_spec != "cubic") ckpts.push_back(bg_spec);

  ScenarioConfig cfg;
  cfg.episodes = episodes;
  cfg.stagger_mis = stagger;
  cfg.episode_len = episode_len;
  cfg.seed = seed;

  ordered_json cfg_json;
  cfg_json["scenario"] = scenario;
  cfg_json["ego"] = ego_spec;
  cfg_json["bg"] = bg_spec;
  cfg_json["episodes"] = episodes;
  cfg_json["stagger"] = stagger;
  cfg_json["episode_len"] = episode_len;
  cfg_json["link"] = cfg.link;

  if (scenario == "single") {
    const EgoSpec ego = load_ego(ego_spec);
    const SwitchingTrace trace = default_switching_trace();
    std::unique_ptr<Controller> controller = ego.factory()();
    const TraceResult result = run_single_flow_trace(*controller, trace, seed);
    write_file_atomic(out / "trace_result.json", result.to_json() + "\n");
    std::ostringstream csv;
    csv << "time_s,tput_mbps,capacity_mbps\n";
    for (std::size_t t = 0; t < result.tput_mbps.size(); ++t) {
      csv << format_double(static_cast<double>(t) * trace.link.mi_duration_s()) << ','
          << format_double(result.tput_mbps[t]) << ','
          << format_double(result.capacity_mbps[t]) << '\n';
    }
    write_file_atomic(out / "trace_series.csv", csv.str());
    write_manifest(out, "eval", cfg_json, seed, ckpts);
    std::cout << "single-flow trace: utilization " << result.utilization
              << ", mean |gap| " << result.mean_abs_gap_mbps << " Mbps\n";
    return 0;
  }

  if (scenario == "duel" || scenario == "cubic") {
    const EgoSpec ego = load_ego(ego_spec);
    FairnessReport report;
    if (scenario == "duel") {
      if (bg_spec.empty()) throw CLI::ValidationError("duel needs --bg <checkpoint>");
      const EgoSpec bg = load_ego(bg_spec);
      report = run_staggered_duel(ego.factory(), bg.factory(), cfg);
    } else {
      report = run_mixed_cubic(ego.factory(), cfg);
    }
    write_file_atomic(out / "report.json", report.to_json() + "\n");
    write_file_atomic(out / "report.csv", report.to_csv());
    write_manifest(out, "eval", cfg_json, seed, ckpts);
    std::cout << "mean J " << report.mean_jain << " (std " << report.std_jain
              << ", min " << report.min_jain << "), ego " << report.ego_mean_mbps
              << " Mbps, bg " << report.bg_mean_mbps << " Mbps";
    if (report.mean_harm) std::cout << ", mean harm " << *report.mean_harm;
    std::cout << "\n";
    return 0;
  }

  if (scenario == "dynamic") {
    const EgoSpec ego = load_ego(ego_spec);
    const DynamicTrace trace = default_dynamic_trace();
    const DynamicReport report = run_dynamic(ego.factory(), trace, cfg);
    write_file_atomic(out / "dynamic_report.json", report.to_json() + "\n");
    write_manifest(out, "eval", cfg_json, seed, ckpts);
    std::cout << "per-phase J:";
    for (const auto& p : report.phases) std::cout << ' ' << p.jain;
    std::cout << "\n";
    return 0;
  }

  throw CLI::ValidationError("unknown scenario: " + scenario);
}

// ---- sweep ----

struct SweepEntry {
  Strategy strategy;
  double lambda = 0.0;
  double loss_coef = 2000.0;
  std::string config_label;
  bool ok = false;
  std::string error;
  FairnessReport report;
  fs::path ckpt_path;
};

int cmd_sweep(const std::string& strategy_str, long long steps,
              std::uint64_t seed, const std::string& out_dir, int jobs,
              int episodes) {
  const fs::path out(out_dir);
  fs::create_directories(out);
  const fs::path cache = cache_root(out_dir);

  // The unmodified baseline backs every duel's background flow.
  TrainConfig base_cfg;
  base_cfg.strategy = Strategy::kBase;
  base_cfg.total_steps = steps;
  base_cfg.seed = seed;
  const fs::path base_path = train_cached(base_cfg, cache);
  const PolicyCheckpoint base_ckpt = load_checkpoint(base_path.string());

  std::vector<SweepEntry> entries;
  auto add_a = [&](double lambda) {
    SweepEntry e;
    e.strategy = Strategy::kA;
    e.lambda = lambda;
    e.config_label = "lambda=" + format_double(lambda);
    entries.push_back(e);
  };
  auto add_c = [&](double coef) {
    SweepEntry e;
    e.strategy = Strategy::kC;
    e.loss_coef = coef;
    e.config_label = "loss=" + format_double(coef);
    entries.push_back(e);
  };
  if (strategy_str == "a" || strategy_str == "all") {
    for (double l : {0.5, 1.0, 2.0, 5.0}) add_a(l);
  }
  if (strategy_str == "b" || strategy_str == "all") {
    SweepEntry e;
    e.strategy = Strategy::kB;
    e.config_label = "state-aug";
    entries.push_back(e);
  }
  if (strategy_str == "c" || strategy_str == "all") {
    for (double c : {4000.0, 8000.0, 16000.0}) add_c(c);
  }
  if (entries.empty()) {
    throw CLI::ValidationError("sweep strategy must be a, b, c or all");
  }

  auto run_entry = [&](SweepEntry& e) {
    try {
      TrainConfig cfg;
      cfg.strategy = e.strategy;
      cfg.lambda = e.lambda;
      cfg.loss_coef = e.loss_coef;
      cfg.total_steps = steps;
      cfg.seed = seed;
      if (e.strategy == Strategy::kA || e.strategy == Strategy::kB) {
        cfg.frozen_base_path = base_path.string();
      }
      e.ckpt_path = train_cached(cfg, cache);
      const PolicyCheckpoint ego = load_checkpoint(e.ckpt_path.string());
      ScenarioConfig scen;
      scen.episodes = episodes;
      scen.seed = seed;
      e.report = run_staggered_duel(policy_factory(ego), policy_factory(base_ckpt), scen);
      e.ok = true;
    } catch (const std::exception& ex) {
      e.ok = false;
      e.error = ex.what();
    }
  };

  // Entries are independent; run up to --jobs at a time, then emit rows in
  // fixed order so reruns produce identical bytes.
  if (jobs <= 1) {
    for (auto& e : entries) run_entry(e);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= entries.size()) return;
        run_entry(entries[i]);
      }
    };
    std::vector<std::future<void>> futs;
    for (int j = 0; j < jobs; ++j) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }

  std::ostringstream csv;
  csv << "strategy,config,mean_J,std_J,ego_mbps,bg_mbps,aggregate_mbps\n";
  for (const auto& e : entries) {
    csv << strategy_name(e.strategy) << ',' << e.config_label << ',';
    if (e.ok) {
      csv << format_double(e.report.mean_jain) << ',' << format_double(e.report.std_jain)
          << ',' << format_double(e.report.ego_mean_mbps) << ','
          << format_double(e.report.bg_mean_mbps) << ','
          << format_double(e.report.aggregate_mbps) << '\n';
    } else {
      csv << "nan,nan,nan,nan,nan\n";
    }
  }
  write_file_atomic(out / "sweep.csv", csv.str());

  // Summary JSON carries warnings the flat CSV cannot: failed rows and the
  // over-penalization ordering checks on the A-sweep.
  ordered_json summary;
  summary["rows"] = ordered_json::array();
  std::vector<std::string> warnings;
  double j05 = -1.0, j20 = -1.0, j50 = -1.0;
  for (const auto& e : entries) {
    ordered_json row;
    row["strategy"] = strategy_name(e.strategy);
    row["config"] = e.config_label;
    row["ok"] = e.ok;
    if (e.ok) {
      row["mean_J"] = e.report.mean_jain;
      row["std_J"] = e.report.std_jain;
      row["ego_mbps"] = e.report.ego_mean_mbps;
      row["bg_mbps"] = e.report.bg_mean_mbps;
      row["aggregate_mbps"] = e.report.aggregate_mbps;
      row["checkpoint"] = e.ckpt_path.string();
      if (e.strategy == Strategy::kA) {
        if (e.lambda == 0.5) j05 = e.report.mean_jain;
        if (e.lambda == 2.0) j20 = e.report.mean_jain;
        if (e.lambda == 5.0) j50 = e.report.mean_jain;
      }
    } else {
      row["error"] = e.error;
      warnings.push_back("entry failed: " + e.config_label + ": " + e.error);
    }
    summary["rows"].push_back(std::move(row));
  }
  if (j05 >= 0.0 && j20 >= 0.0 && !(j20 > j05)) {
    warnings.push_back("a_sweep_ordering_violation: J(lambda=2.0)=" +
                       format_double(j20) + " <= J(lambda=0.5)=" + format_double(j05));
  }
  if (j20 >= 0.0 && j50 >= 0.0 && !(j50 < j20)) {
    warnings.push_back("a_sweep_ordering_violation: J(lambda=5.0)=" +
                       format_double(j50) + " >= J(lambda=2.0)=" + format_double(j20));
  }
  summary["warnings"] = warnings;
  write_file_atomic(out / "sweep_summary.json", summary.dump(2) + "\n");

  ordered_json cfg_json;
  cfg_json["strategy"] = strategy_str;
  cfg_json["steps"] = steps;
  cfg_json["episodes"] = episodes;
  write_manifest(out, "sweep", cfg_json, seed, {base_path.string()});

  std::cout << csv.str();
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const bool all_ok =
      std::all_of(entries.begin(), entries.end(), [](const SweepEntry& e) { return e.ok; });
  return all_ok ? 0 : 1;
}

// ---- report (plot-ready series) ----

int cmd_report(const std::string& scenario, const std::string& ego_spec,
               const std::string& bg_spec, std::uint64_t seed,
               const std::string& out_dir, int stagger, int episode_len,
               int episode) {
  const fs::path out(out_dir);
  fs::create_directories(out);
  ScenarioConfig cfg;
  cfg.stagger_mis = stagger;
  cfg.episode_len = episode_len;
  cfg.seed = seed;
  cfg.episodes = episode + 1;

  ordered_json cfg_json;
  cfg_json["scenario"] = scenario;
  cfg_json["ego"] = ego_spec;
  cfg_json["bg"] = bg_spec;
  cfg_json["episode"] = episode;

  if (scenario == "single") {
    const EgoSpec ego = load_ego(ego_spec);
    const SwitchingTrace trace = default_switching_trace();
    std::unique_ptr<Controller> controller = ego.factory()();
    const TraceResult result = run_single_flow_trace(*controller, trace, seed);
    EpisodeSeries series;
    series.tput_mbps = {result.tput_mbps};
    series.capacity_mbps = result.capacity_mbps;
    series.mi_duration_s = trace.link.mi_duration_s();
    write_file_atomic(out / "series.csv", series_csv(series));
  } else if (scenario == "duel" || scenario == "cubic") {
    const EgoSpec ego = load_ego(ego_spec);
    if (scenario == "duel" && bg_spec.empty()) {
      throw CLI::ValidationError("duel needs --bg <checkpoint>");
    }
    const EgoSpec bg_loaded = scenario == "cubic" ? EgoSpec{true, std::nullopt}
                                                  : load_ego(bg_spec);
    const EpisodeSeries series =
        run_duel_episode_series(ego.factory(), bg_loaded.factory(), cfg, episode);
    write_file_atomic(out / "series.csv", series_csv(series));
  } else if (scenario == "dynamic") {
    const EgoSpec ego = load_ego(ego_spec);
    const DynamicReport report = run_dynamic(ego.factory(), default_dynamic_trace(), cfg);
    EpisodeSeries series;
    series.tput_mbps = report.tput_mbps;
    series.capacity_mbps.assign(report.tput_mbps.front().size(), cfg.link.capacity_mbps());
    series.mi_duration_s = report.mi_duration_s;
    write_file_atomic(out / "series.csv", series_csv(series));
  } else {
    throw CLI::ValidationError("unknown scenario: " + scenario);
  }
  write_manifest(out, "report", cfg_json, seed, {});
  std::cout << "wrote " << (out / "series.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"congestion-control fairness lab"};
  app.set_config("--config");
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::uint64_t seed = 42;
  std::string out_dir = "out";
  int jobs = 1;
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--jobs", jobs, "parallel jobs for sweeps")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a policy");
  std::string strategy = "base";
  double lambda = 2.0, loss_coef = 8000.0;
  long long steps = 1'600'000;
  std::string frozen_base;
  int episode_len = 400;
  train_cmd->add_option("--strategy", strategy, "base|a|b|c")->required();
  auto* lambda_opt = train_cmd->add_option("--lambda", lambda, "strategy A penalty weight");
  auto* loss_opt = train_cmd->add_option("--loss-coef", loss_coef, "strategy C loss coefficient");
  train_cmd->add_option("--steps", steps, "environment steps")->capture_default_str();
  train_cmd->add_option("--frozen-base", frozen_base, "frozen base checkpoint (strategies a/b)");
  train_cmd->add_option("--episode-len", episode_len, "episode length in MIs")
      ->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a scenario");
  std::string scenario, ego_spec, bg_spec;
  int episodes = 50, stagger = 50;
  eval_cmd->add_option("--scenario", scenario, "single|duel|cubic|dynamic")->required();
  eval_cmd->add_option("--ego", ego_spec, "ego checkpoint path or 'cubic'")->required();
  eval_cmd->add_option("--bg", bg_spec, "background checkpoint path or 'cubic'");
  eval_cmd->add_option("--episodes", episodes, "episode count")->capture_default_str();
  eval_cmd->add_option("--stagger", stagger, "stagger MIs (duel)")->capture_default_str();
  eval_cmd->add_option("--episode-len", episode_len, "episode length in MIs")
      ->capture_default_str();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter sweep");
  std::string sweep_strategy = "all";
  sweep_cmd->add_option("--strategy", sweep_strategy, "a|b|c|all")->capture_default_str();
  sweep_cmd->add_option("--steps", steps, "training steps per entry")->capture_default_str();
  sweep_cmd->add_option("--episodes", episodes, "evaluation episodes")->capture_default_str();

  // report
  auto* report_cmd = app.add_subcommand("report", "export plot-ready series");
  int report_episode = 0;
  report_cmd->add_option("--scenario", scenario, "single|duel|cubic|dynamic")->required();
  report_cmd->add_option("--ego", ego_spec, "ego checkpoint path or 'cubic'")->required();
  report_cmd->add_option("--bg", bg_spec, "background checkpoint path or 'cubic'");
  report_cmd->add_option("--stagger", stagger, "stagger MIs")->capture_default_str();
  report_cmd->add_option("--episode", report_episode, "episode index to export")
      ->capture_default_str();
  report_cmd->add_option("--episode-len", episode_len, "episode length in MIs")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      return cmd_train(strategy, lambda, loss_coef, steps, seed, out_dir,
                       frozen_base, lambda_opt->count() > 0, loss_opt->count() > 0,
                       episode_len);
    }
    if (eval_cmd->parsed()) {
      if (scenario == "cubic" && eval_cmd->get_option("--stagger")->count() == 0) {
        stagger = 0;  // mixed-CUBIC protocol has no stagger unless configured
      }
      return cmd_eval(scenario, ego_spec, bg_spec, episodes, stagger, seed,
                      out_dir, episode_len);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_strategy, steps, seed, out_dir, jobs, episodes);
    }
    if (report_cmd->parsed()) {
      if (scenario == "cubic" && report_cmd->get_option("--stagger")->count() == 0) {
        stagger = 0;
      }
      return cmd_report(scenario, ego_spec, bg_spec, seed, out_dir, stagger,
                        episode_len, report_episode);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 2;
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
