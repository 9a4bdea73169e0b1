#include "rpmguard/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "rpmguard/errors.hpp"
#include "rpmguard/io.hpp"

namespace rpmguard {

namespace {

using nlohmann::json;

std::map<DeviceKind, DeviceProfile> fit_profiles_from(
    const PipelineConfig& cfg, std::span<const RawEvent> behavior_raw) {
  std::map<DeviceKind, std::vector<double>> readings;
  for (const auto& rec : behavior_raw) {
    if (!rec.reading.has_value()) continue;
    readings[cfg.registry.kind_of(rec.device)].push_back(*rec.reading);
  }
  std::map<DeviceKind, DeviceProfile> profiles;
  for (const auto& [kind, values] : readings) {
    profiles[kind] = fit_profile(kind, values);
  }
  return profiles;
}

std::vector<ObservationSequence> expand_segments(
    std::span<const SequenceSegment> segments, std::size_t cap) {
  std::vector<ObservationSequence> sequences;
  for (const auto& seg : segments) {
    auto expanded = expand(seg.vectors, cap);
    sequences.insert(sequences.end(),
                     std::make_move_iterator(expanded.begin()),
                     std::make_move_iterator(expanded.end()));
  }
  return sequences;
}

// Training sequences: every expanded segment plus every expanded sliding
// window. The windows teach the initial distribution where detection
// windows actually start; without them, any window opening mid-segment
// pays a floored-pi penalty and calibration sinks the cutoff.
std::vector<ObservationSequence> training_sequences(
    std::span<const SequenceSegment> segments, const DetectorConfig& detector) {
  std::vector<ObservationSequence> sequences =
      expand_segments(segments, detector.expansion_cap);
  for (const auto& seg : segments) {
    for (const auto window : windows_of(seg, detector.window_len)) {
      if (window.size() == seg.vectors.size()) continue;  // already covered
      auto expanded = expand(window, detector.expansion_cap);
      sequences.insert(sequences.end(),
                       std::make_move_iterator(expanded.begin()),
                       std::make_move_iterator(expanded.end()));
    }
  }
  return sequences;
}

json optional_metric(std::optional<double> v) {
  if (v.has_value()) return *v;
  return nullptr;
}

}  // namespace

IngestOutput ingest_logs(const PipelineConfig& cfg,
                         const std::string& behavior_path,
                         const std::string& presence_path,
                         const std::map<DeviceKind, DeviceProfile>* profiles,
                         bool fit_profiles) {
  IngestOutput out;
  const auto behavior_all = read_event_log(behavior_path);
  const auto presence_all = read_event_log(presence_path);
  out.behavior_raw =
      filter_heartbeats(behavior_all, cfg.pipeline.heartbeat_tolerance);
  out.presence_raw =
      filter_heartbeats(presence_all, cfg.pipeline.heartbeat_tolerance);

  if (profiles != nullptr && !profiles->empty()) {
    out.profiles = *profiles;
  } else if (!cfg.profiles.empty()) {
    out.profiles = cfg.profiles;
  } else if (fit_profiles) {
    out.profiles = fit_profiles_from(cfg, out.behavior_raw);
  }

  const auto behavior =
      resolve_events(out.behavior_raw, cfg.registry, out.profiles);
  const auto presence =
      resolve_events(out.presence_raw, cfg.registry, out.profiles);
  auto timeline =
      merge_logs(behavior, presence, cfg.registry, cfg.pipeline.clock_skew);
  out.warnings = std::move(timeline.warnings);
  out.vectors = coalesce(timeline.events, cfg.pipeline.coalesce_window);
  out.segments = segment(out.vectors, cfg.pipeline.gap_threshold,
                         cfg.pipeline.max_segment_len);
  return out;
}

TrainOutput train_pipeline(const PipelineConfig& cfg,
                           const std::string& behavior_path,
                           const std::string& presence_path) {
  TrainOutput out;
  auto ingest =
      ingest_logs(cfg, behavior_path, presence_path, nullptr, true);
  out.warnings = ingest.warnings;
  out.profiles = ingest.profiles;
  out.segment_count = ingest.segments.size();

  const auto sequences = training_sequences(ingest.segments, cfg.detector);
  out.sequence_count = sequences.size();
  out.train_result =
      train_baum_welch(sequences, cfg.n_states, kAlphabetSize, cfg.train);
  out.model = out.train_result.model;
  out.model.alphabet_tag = cfg.alphabet_version;
  out.threshold =
      calibrate_threshold(out.model, ingest.segments, cfg.detector);
  return out;
}

std::string train_report_json(const TrainOutput& out) {
  json doc;
  doc["segments"] = out.segment_count;
  doc["training_sequences"] = out.sequence_count;
  doc["iterations"] = out.train_result.iterations;
  doc["converged"] = out.train_result.converged;
  doc["log_likelihood_trace"] = out.train_result.log_likelihood_trace;
  doc["train_min_log_prob"] = out.threshold.train_min;
  doc["train_max_log_prob"] = out.threshold.train_max;
  doc["cutoff"] = out.threshold.cutoff;
  doc["calibration_sequences"] = out.threshold.sequence_count;
  doc["warnings"] = out.warnings;
  return doc.dump(2) + "\n";
}

ScoreOutput score_pipeline(const PipelineConfig& cfg, const HmmModel& model,
                           const Threshold& threshold,
                           const std::map<DeviceKind, DeviceProfile>& profiles,
                           const std::string& behavior_path,
                           const std::string& presence_path) {
  ScoreOutput out;
  auto ingest =
      ingest_logs(cfg, behavior_path, presence_path, &profiles, false);
  out.warnings = ingest.warnings;
  out.alerts = scan_segments(model, threshold, ingest.segments, cfg.detector,
                             &out.warnings, &out.windows);
  return out;
}

SplitOutput split_logs(const PipelineConfig& cfg,
                       const std::string& behavior_path,
                       const std::string& presence_path, double fraction) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw InvalidInputError("split fraction must lie in (0, 1)");
  }
  const auto behavior_all = read_event_log(behavior_path);
  const auto presence_all = read_event_log(presence_path);
  const auto behavior =
      filter_heartbeats(behavior_all, cfg.pipeline.heartbeat_tolerance);
  const auto presence =
      filter_heartbeats(presence_all, cfg.pipeline.heartbeat_tolerance);

  // Timestamp-only segmentation: grouping and gap logic never look at
  // symbols, so the boundary matches the full pipeline's segments.
  std::vector<TimePoint> stamps;
  stamps.reserve(behavior.size() + presence.size());
  for (const auto& rec : behavior) stamps.push_back(rec.ts);
  for (const auto& rec : presence) stamps.push_back(rec.ts);
  std::sort(stamps.begin(), stamps.end());
  if (stamps.size() < 2) {
    throw InvalidInputError("need at least 2 events to split");
  }
  std::vector<TimePoint> anchors;
  {
    std::size_t i = 0;
    while (i < stamps.size()) {
      anchors.push_back(stamps[i]);
      std::size_t j = i;
      while (j < stamps.size() &&
             stamps[j] - stamps[i] <= cfg.pipeline.coalesce_window) {
        ++j;
      }
      i = j;
    }
  }
  struct Span {
    TimePoint start, end;
  };
  std::vector<Span> spans;
  {
    std::size_t len = 0;
    for (const TimePoint t : anchors) {
      if (spans.empty() || t - spans.back().end > cfg.pipeline.gap_threshold ||
          len >= cfg.pipeline.max_segment_len) {
        spans.push_back(Span{t, t});
        len = 1;
      } else {
        spans.back().end = t;
        ++len;
      }
    }
  }
  if (spans.size() < 2) {
    throw InvalidInputError("need at least 2 segments to split");
  }
  auto cut = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(spans.size())));
  cut = std::clamp<std::size_t>(cut, 1, spans.size() - 1);

  SplitOutput out;
  out.train_segments = cut;
  out.test_segments = spans.size() - cut;
  out.boundary =
      spans[cut - 1].end + (spans[cut].start - spans[cut - 1].end) / 2;
  for (const auto& rec : behavior_all) {
    (rec.ts <= out.boundary ? out.train_behavior : out.test_behavior)
        .push_back(rec);
  }
  for (const auto& rec : presence_all) {
    (rec.ts <= out.boundary ? out.train_presence : out.test_presence)
        .push_back(rec);
  }
  return out;
}

std::vector<SweepRow> sweep_states(const PipelineConfig& cfg,
                                   const std::string& behavior_path,
                                   const std::string& presence_path,
                                   const std::vector<std::size_t>& state_counts,
                                   double fraction) {
  if (state_counts.empty()) {
    throw InvalidInputError("no state counts to sweep");
  }
  const auto split_out =
      split_logs(cfg, behavior_path, presence_path, fraction);

  // Profiles come from the training side only.
  PipelineConfig train_cfg = cfg;
  if (train_cfg.profiles.empty()) {
    auto filtered = filter_heartbeats(split_out.train_behavior,
                                      cfg.pipeline.heartbeat_tolerance);
    train_cfg.profiles = fit_profiles_from(cfg, filtered);
  }

  auto ingest = ingest_logs(cfg, behavior_path, presence_path,
                            &train_cfg.profiles, false);
  std::vector<SequenceSegment> train_segments, test_segments;
  for (auto& seg : ingest.segments) {
    (seg.start_ts <= split_out.boundary ? train_segments : test_segments)
        .push_back(std::move(seg));
  }
  const auto train_seqs =
      expand_segments(train_segments, cfg.detector.expansion_cap);
  const auto test_seqs =
      expand_segments(test_segments, cfg.detector.expansion_cap);
  if (train_seqs.empty() || test_seqs.empty()) {
    throw InvalidInputError("sweep split left an empty side");
  }

  std::vector<SweepRow> rows;
  for (std::size_t n : state_counts) {
    SweepRow row;
    row.n_states = n;
    const auto result =
        train_baum_welch(train_seqs, n, kAlphabetSize, cfg.train);
    row.train_total_ll = result.log_likelihood_trace.back();
    row.iterations = result.iterations;
    row.converged = result.converged;
    double total = 0.0;
    for (const auto& seq : test_seqs) {
      total += forward_log_likelihood(result.model, seq);
    }
    row.heldout_mean_ll = total / static_cast<double>(test_seqs.size());
    rows.push_back(row);
  }
  return rows;
}

std::string metrics_report_json(const EvalReport& report) {
  json doc;
  doc["confusion"] = {{"tp", report.windows.tp},
                      {"fp", report.windows.fp},
                      {"fn", report.windows.fn},
                      {"tn", report.windows.tn}};
  doc["windows_total"] = report.windows.total();
  doc["accuracy"] = report.windows.accuracy();
  doc["precision"] = optional_metric(report.windows.precision());
  doc["recall"] = optional_metric(report.windows.recall());
  doc["false_positive_rate"] = optional_metric(report.windows.fpr());
  doc["scenarios"] = {{"total", report.labels_total},
                      {"detected", report.labels_detected},
                      {"missed", report.missed_scenarios}};
  return doc.dump(2) + "\n";
}

std::string confusion_table_text(const EvalReport& report) {
  const auto& cm = report.windows;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "N=%llu            Actual: Yes   Actual: No    Total\n"
                "Predicted: Yes    TP = %-6llu   FP = %-6llu   %llu\n"
                "Predicted: No     FN = %-6llu   TN = %-6llu   %llu\n"
                "Total             %-11llu   %-10llu\n",
                static_cast<unsigned long long>(cm.total()),
                static_cast<unsigned long long>(cm.tp),
                static_cast<unsigned long long>(cm.fp),
                static_cast<unsigned long long>(cm.tp + cm.fp),
                static_cast<unsigned long long>(cm.fn),
                static_cast<unsigned long long>(cm.tn),
                static_cast<unsigned long long>(cm.fn + cm.tn),
                static_cast<unsigned long long>(cm.tp + cm.fn),
                static_cast<unsigned long long>(cm.fp + cm.tn));
  return buf;
}

BenchmarkOutput run_benchmark(const PipelineConfig& base_cfg, std::size_t days,
                              std::uint64_t seed, std::size_t random_count,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const char* name) {
    return (fs::path(out_dir) / name).string();
  };

  // The benchmark is a controlled experiment: unless the config binds its
  // own profiles, discretize against the routine's reference distributions
  // (the clinician-known normal ranges) rather than re-fitting them from
  // truncated samples.
  PipelineConfig cfg = base_cfg;
  if (cfg.profiles.empty()) {
    cfg.profiles[DeviceKind::kOximeter] =
        DeviceProfile{DeviceKind::kOximeter, cfg.routine.oximeter_mu,
                      cfg.routine.oximeter_sigma};
    cfg.profiles[DeviceKind::kScale] = DeviceProfile{
        DeviceKind::kScale, cfg.routine.scale_mu, cfg.routine.scale_sigma};
  }

  // 1. Simulate the normal period.
  const auto logs = simulate_days(cfg.routine, days, seed);
  write_event_log(path("behavior.jsonl"), logs.behavior);
  write_event_log(path("presence.jsonl"), logs.presence);

  // 2. Chronological 70/30 split.
  const auto split_out = split_logs(cfg, path("behavior.jsonl"),
                                    path("presence.jsonl"), 0.7);
  write_event_log(path("train_behavior.jsonl"), split_out.train_behavior);
  write_event_log(path("train_presence.jsonl"), split_out.train_presence);
  write_event_log(path("test_behavior.jsonl"), split_out.test_behavior);
  write_event_log(path("test_presence.jsonl"), split_out.test_presence);

  // 3. Train + calibrate on the training part.
  const auto trained = train_pipeline(cfg, path("train_behavior.jsonl"),
                                      path("train_presence.jsonl"));
  write_text_file(path("model.json"), serialize_model(trained.model));
  write_text_file(path("threshold.json"),
                  serialize_threshold(trained.threshold));
  write_text_file(path("profiles.json"),
                  serialize_profiles(trained.profiles));
  write_text_file(path("train_report.json"), train_report_json(trained));

  // 4. Inject the 8 crafted scenarios + random perturbations into the test
  // stream.
  SimulatedLogs test_logs{split_out.test_behavior, split_out.test_presence};
  auto crafted = inject_all_scenarios(test_logs, cfg.routine, seed);
  auto randoms = generate_random_anomalies(
      crafted.logs, cfg.registry, trained.profiles, cfg.detector,
      cfg.pipeline.coalesce_window, cfg.pipeline.heartbeat_tolerance,
      cfg.pipeline.gap_threshold, cfg.pipeline.max_segment_len, random_count,
      seed, crafted.labels);
  std::vector<LabelInterval> labels = crafted.labels;
  labels.insert(labels.end(), randoms.labels.begin(), randoms.labels.end());
  std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start, a.end, a.scenario) <
           std::tie(b.start, b.end, b.scenario);
  });
  write_event_log(path("mutated_behavior.jsonl"), randoms.logs.behavior);
  write_event_log(path("mutated_presence.jsonl"), randoms.logs.presence);
  write_labels(path("labels.jsonl"), labels);

  // 5. Score the mutated test stream.
  const auto scored = score_pipeline(cfg, trained.model, trained.threshold,
                                     trained.profiles,
                                     path("mutated_behavior.jsonl"),
                                     path("mutated_presence.jsonl"));
  write_alerts(path("alerts.jsonl"), scored.alerts);
  write_window_records(path("windows.jsonl"), scored.windows);

  // 6. Evaluate.
  BenchmarkOutput out;
  out.report = evaluate(scored.alerts, labels, scored.windows);
  write_text_file(path("metrics.json"), metrics_report_json(out.report));
  out.normal_test_windows = out.report.windows.fp + out.report.windows.tn;
  out.segment_count = split_out.train_segments + split_out.test_segments;
  out.scenario_recall =
      labels.empty() ? 0.0
                     : static_cast<double>(out.report.labels_detected) /
                           static_cast<double>(labels.size());
  out.window_fpr = out.report.windows.fpr().value_or(0.0);
  return out;
}

}  // namespace rpmguard
