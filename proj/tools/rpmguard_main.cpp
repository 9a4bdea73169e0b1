#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rpmguard/config.hpp"
#include "rpmguard/errors.hpp"
#include "rpmguard/io.hpp"
#include "rpmguard/pipeline.hpp"

namespace {

using namespace rpmguard;

constexpr int kExitOk = 0;
constexpr int kExitAlerts = 1;
constexpr int kExitError = 2;

PipelineConfig load_config(const std::string& config_flag) {
  std::string path = config_flag;
  if (path.empty()) {
    if (const char* env = std::getenv("RPMGUARD_CONFIG")) path = env;
  }
  if (path.empty()) return PipelineConfig{};
  return PipelineConfig::load(path);
}

// CLI flag, then the config's paths table, then the default.
std::string resolve_path(const std::string& flag_value,
                         const PipelineConfig& cfg, const std::string& key,
                         const std::string& fallback) {
  if (!flag_value.empty()) return flag_value;
  auto it = cfg.paths.find(key);
  if (it != cfg.paths.end()) return it->second;
  return fallback;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HMM-based anomaly detection for remote patient monitoring "
               "event streams"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "pipeline config file (or RPMGUARD_CONFIG)");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate",
                                 "generate normal-behavior event logs");
  std::size_t sim_days = 21;
  std::uint64_t sim_seed = 1;
  std::string sim_behavior, sim_presence;
  sim->add_option("--days", sim_days, "days to simulate")->required();
  sim->add_option("--seed", sim_seed, "simulation seed");
  sim->add_option("--out-behavior", sim_behavior, "behavior log path");
  sim->add_option("--out-presence", sim_presence, "presence log path");

  // ---- split ----
  auto* spl = app.add_subcommand(
      "split", "chronologically split logs at a segment boundary");
  std::string spl_behavior, spl_presence;
  double spl_fraction = 0.7;
  std::string spl_out_prefix = "split";
  spl->add_option("--behavior", spl_behavior, "behavior log")->required();
  spl->add_option("--presence", spl_presence, "presence log")->required();
  spl->add_option("--fraction", spl_fraction, "training fraction in (0,1)");
  spl->add_option("--out-prefix", spl_out_prefix,
                  "writes <prefix>_{train,test}_{behavior,presence}.jsonl");

  // ---- train ----
  auto* trn = app.add_subcommand(
      "train", "train the HMM and calibrate the anomaly threshold");
  std::string trn_behavior, trn_presence, trn_model, trn_threshold,
      trn_profiles, trn_report;
  trn->add_option("--behavior", trn_behavior, "behavior log");
  trn->add_option("--presence", trn_presence, "presence log");
  trn->add_option("--model", trn_model, "model output path");
  trn->add_option("--threshold", trn_threshold, "threshold output path");
  trn->add_option("--profiles", trn_profiles, "profiles output path");
  trn->add_option("--report", trn_report, "calibration report output path");

  // ---- score ----
  auto* sco = app.add_subcommand(
      "score", "score logs; exit 0 clean, 1 alerts, 2 error");
  std::string sco_behavior, sco_presence, sco_model, sco_threshold,
      sco_profiles, sco_alerts, sco_windows;
  sco->add_option("--behavior", sco_behavior, "behavior log");
  sco->add_option("--presence", sco_presence, "presence log");
  sco->add_option("--model", sco_model, "trained model");
  sco->add_option("--threshold", sco_threshold, "calibrated threshold");
  sco->add_option("--profiles", sco_profiles, "frozen device profiles");
  sco->add_option("--alerts", sco_alerts, "alerts output (JSONL)");
  sco->add_option("--windows", sco_windows, "per-window score dump (JSONL)");

  // ---- inject ----
  auto* inj = app.add_subcommand(
      "inject", "inject anomaly scenarios into normal logs");
  std::string inj_behavior, inj_presence, inj_at, inj_out_behavior,
      inj_out_presence, inj_labels, inj_profiles;
  int inj_scenario = 0;
  bool inj_all = false;
  std::size_t inj_random = 0;
  std::uint64_t inj_seed = 1;
  inj->add_option("--behavior", inj_behavior, "behavior log")->required();
  inj->add_option("--presence", inj_presence, "presence log")->required();
  inj->add_option("--scenario", inj_scenario, "crafted scenario id (1..8)");
  inj->add_flag("--all-scenarios", inj_all, "inject all eight scenarios");
  inj->add_option("--random", inj_random, "random perturbation count");
  inj->add_option("--at", inj_at, "injection time (ISO-8601 UTC)");
  inj->add_option("--seed", inj_seed, "injection seed");
  inj->add_option("--profiles", inj_profiles,
                  "profiles (needed for --random candidate detection)");
  inj->add_option("--out-behavior", inj_out_behavior, "mutated behavior log");
  inj->add_option("--out-presence", inj_out_presence, "mutated presence log");
  inj->add_option("--labels", inj_labels, "ground-truth labels output");

  // ---- evaluate ----
  auto* evl = app.add_subcommand(
      "evaluate", "confusion matrix and metrics from alerts vs labels");
  std::string evl_alerts, evl_labels, evl_windows, evl_report;
  evl->add_option("--alerts", evl_alerts, "alerts file")->required();
  evl->add_option("--labels", evl_labels, "labels file")->required();
  evl->add_option("--windows", evl_windows, "window dump file")->required();
  evl->add_option("--report", evl_report, "metrics report output path");

  // ---- sweep ----
  auto* swp = app.add_subcommand(
      "sweep", "held-out log-likelihood per hidden-state count");
  std::string swp_behavior, swp_presence;
  std::vector<std::size_t> swp_states{2, 4, 6, 8, 10, 12};
  double swp_fraction = 0.7;
  swp->add_option("--behavior", swp_behavior, "behavior log")->required();
  swp->add_option("--presence", swp_presence, "presence log")->required();
  swp->add_option("--states", swp_states, "candidate state counts");
  swp->add_option("--fraction", swp_fraction, "training fraction");

  // ---- scenarios ----
  auto* cat = app.add_subcommand("scenarios", "print the scenario catalog");
  std::string cat_out;
  cat->add_option("--out", cat_out, "also write the catalog to a file");

  // ---- benchmark ----
  auto* bmk = app.add_subcommand(
      "benchmark", "full protocol: simulate, split, train, inject, score, "
                   "evaluate");
  std::size_t bmk_days = 21;
  std::uint64_t bmk_seed = 7;
  std::size_t bmk_random = 38;
  std::string bmk_dir = "benchmark_out";
  bmk->add_option("--days", bmk_days, "days to simulate");
  bmk->add_option("--seed", bmk_seed, "master seed");
  bmk->add_option("--random", bmk_random, "random perturbation count");
  bmk->add_option("--out-dir", bmk_dir, "artifact directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitError;
  }

  try {
    const PipelineConfig cfg = load_config(config_path);

    if (*sim) {
      const auto logs = simulate_days(cfg.routine, sim_days, sim_seed);
      const auto bpath = resolve_path(sim_behavior, cfg, "behavior_log",
                                      "behavior.jsonl");
      const auto ppath = resolve_path(sim_presence, cfg, "presence_log",
                                      "presence.jsonl");
      write_event_log(bpath, logs.behavior);
      write_event_log(ppath, logs.presence);
      std::cout << "wrote " << logs.behavior.size() << " behavior and "
                << logs.presence.size() << " presence events for " << sim_days
                << " days\n";
      return kExitOk;
    }

    if (*spl) {
      const auto out = split_logs(cfg, spl_behavior, spl_presence,
                                  spl_fraction);
      write_event_log(spl_out_prefix + "_train_behavior.jsonl",
                      out.train_behavior);
      write_event_log(spl_out_prefix + "_train_presence.jsonl",
                      out.train_presence);
      write_event_log(spl_out_prefix + "_test_behavior.jsonl",
                      out.test_behavior);
      write_event_log(spl_out_prefix + "_test_presence.jsonl",
                      out.test_presence);
      std::cout << "split at " << format_iso8601(out.boundary) << ": "
                << out.train_segments << " train / " << out.test_segments
                << " test segments\n";
      return kExitOk;
    }

    if (*trn) {
      const auto bpath = resolve_path(trn_behavior, cfg, "behavior_log",
                                      "behavior.jsonl");
      const auto ppath = resolve_path(trn_presence, cfg, "presence_log",
                                      "presence.jsonl");
      const auto out = train_pipeline(cfg, bpath, ppath);
      print_warnings(out.warnings);
      write_text_file(resolve_path(trn_model, cfg, "model", "model.json"),
                      serialize_model(out.model));
      write_text_file(
          resolve_path(trn_threshold, cfg, "threshold", "threshold.json"),
          serialize_threshold(out.threshold));
      write_text_file(
          resolve_path(trn_profiles, cfg, "profiles", "profiles.json"),
          serialize_profiles(out.profiles));
      write_text_file(
          resolve_path(trn_report, cfg, "train_report", "train_report.json"),
          train_report_json(out));
      std::cout << "trained on " << out.sequence_count
                << " expanded sequences from " << out.segment_count
                << " segments; cutoff " << out.threshold.cutoff << " ["
                << out.threshold.train_min << ", " << out.threshold.train_max
                << "]\n";
      return kExitOk;
    }

    if (*sco) {
      const auto model = deserialize_model(
          read_text_file(resolve_path(sco_model, cfg, "model", "model.json")),
          cfg.alphabet_version);
      const auto threshold = deserialize_threshold(read_text_file(
          resolve_path(sco_threshold, cfg, "threshold", "threshold.json")));
      const auto profiles = deserialize_profiles(read_text_file(
          resolve_path(sco_profiles, cfg, "profiles", "profiles.json")));
      const auto bpath = resolve_path(sco_behavior, cfg, "behavior_log",
                                      "behavior.jsonl");
      const auto ppath = resolve_path(sco_presence, cfg, "presence_log",
                                      "presence.jsonl");
      const auto out =
          score_pipeline(cfg, model, threshold, profiles, bpath, ppath);
      print_warnings(out.warnings);
      write_alerts(resolve_path(sco_alerts, cfg, "alerts", "alerts.jsonl"),
                   out.alerts);
      write_window_records(
          resolve_path(sco_windows, cfg, "windows", "windows.jsonl"),
          out.windows);
      std::cout << out.windows.size() << " windows scored, "
                << out.alerts.size() << " alerts\n";
      for (const auto& span : merge_alert_spans(out.alerts)) {
        std::cout << "  ANOMALY " << format_iso8601(span.start) << " .. "
                  << format_iso8601(span.end) << "  windows="
                  << span.window_count << "  min log-prob "
                  << span.min_log_prob << "  [";
        for (std::size_t i = 0; i < span.worst_sequence.size(); ++i) {
          std::cout << (i ? ", " : "") << symbol_name(span.worst_sequence[i]);
        }
        std::cout << "]\n";
      }
      return out.alerts.empty() ? kExitOk : kExitAlerts;
    }

    if (*inj) {
      SimulatedLogs logs{read_event_log(inj_behavior),
                         read_event_log(inj_presence)};
      std::vector<LabelInterval> labels;
      if (inj_all && inj_scenario != 0) {
        throw InvalidInputError("--scenario and --all-scenarios conflict");
      }
      if (inj_all) {
        auto crafted = inject_all_scenarios(logs, cfg.routine, inj_seed);
        logs = std::move(crafted.logs);
        labels = std::move(crafted.labels);
      } else if (inj_scenario != 0) {
        const TimePoint at =
            inj_at.empty()
                ? find_injection_time(logs, cfg.routine, inj_scenario,
                                      inj_seed)
                : parse_iso8601(inj_at);
        auto injected =
            inject_scenario(logs, cfg.routine, inj_scenario, at, inj_seed);
        logs = std::move(injected.logs);
        labels.push_back(injected.label);
      } else if (inj_random == 0) {
        throw InvalidInputError(
            "nothing to inject: use --scenario, --all-scenarios or --random");
      }
      if (inj_random > 0) {
        std::map<DeviceKind, DeviceProfile> profiles = cfg.profiles;
        if (!inj_profiles.empty()) {
          profiles = deserialize_profiles(read_text_file(inj_profiles));
        }
        auto randoms = generate_random_anomalies(
            logs, cfg.registry, profiles, cfg.detector,
            cfg.pipeline.coalesce_window, cfg.pipeline.heartbeat_tolerance,
            cfg.pipeline.gap_threshold, cfg.pipeline.max_segment_len,
            inj_random, inj_seed, labels);
        logs = std::move(randoms.logs);
        labels.insert(labels.end(), randoms.labels.begin(),
                      randoms.labels.end());
      }
      std::sort(labels.begin(), labels.end(),
                [](const auto& a, const auto& b) {
                  return std::tie(a.start, a.end, a.scenario) <
                         std::tie(b.start, b.end, b.scenario);
                });
      write_event_log(resolve_path(inj_out_behavior, cfg, "mutated_behavior",
                                   "mutated_behavior.jsonl"),
                      logs.behavior);
      write_event_log(resolve_path(inj_out_presence, cfg, "mutated_presence",
                                   "mutated_presence.jsonl"),
                      logs.presence);
      write_labels(resolve_path(inj_labels, cfg, "labels", "labels.jsonl"),
                   labels);
      std::cout << "injected " << labels.size() << " labeled anomalies\n";
      return kExitOk;
    }

    if (*evl) {
      const auto alerts = read_alerts(evl_alerts);
      const auto labels = read_labels(evl_labels);
      const auto windows = read_window_records(evl_windows);
      const auto report = evaluate(alerts, labels, windows);
      write_text_file(
          resolve_path(evl_report, cfg, "metrics", "metrics.json"),
          metrics_report_json(report));
      std::cout << confusion_table_text(report);
      std::cout << "accuracy " << report.windows.accuracy() << ", scenarios "
                << report.labels_detected << "/" << report.labels_total
                << " detected\n";
      return kExitOk;
    }

    if (*swp) {
      const auto rows = sweep_states(cfg, swp_behavior, swp_presence,
                                     swp_states, swp_fraction);
      std::cout << "N      heldout mean log-prob   train total   iterations\n";
      for (const auto& row : rows) {
        std::printf("%-6zu %-22.4f %-13.2f %zu%s\n", row.n_states,
                    row.heldout_mean_ll, row.train_total_ll, row.iterations,
                    row.converged ? "" : " (not converged)");
      }
      return kExitOk;
    }

    if (*cat) {
      const auto text = scenario_catalog_text();
      std::cout << text;
      if (!cat_out.empty()) write_text_file(cat_out, text);
      return kExitOk;
    }

    if (*bmk) {
      const auto out =
          run_benchmark(cfg, bmk_days, bmk_seed, bmk_random, bmk_dir);
      std::cout << confusion_table_text(out.report);
      std::cout << "scenario recall " << out.report.labels_detected << "/"
                << out.report.labels_total << ", window FPR "
                << out.window_fpr << ", accuracy "
                << out.report.windows.accuracy() << "\n"
                << "artifacts in " << bmk_dir << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
