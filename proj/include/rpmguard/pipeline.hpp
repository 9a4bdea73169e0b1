#pragma once

#include <map>
#include <string>
#include <vector>

#include "rpmguard/config.hpp"
#include "rpmguard/detector.hpp"
#include "rpmguard/eval.hpp"
#include "rpmguard/events.hpp"
#include "rpmguard/hmm.hpp"
#include "rpmguard/simulator.hpp"

namespace rpmguard {

struct IngestOutput {
  std::vector<RawEvent> behavior_raw;  // heartbeat-filtered
  std::vector<RawEvent> presence_raw;
  std::map<DeviceKind, DeviceProfile> profiles;
  std::vector<ObservationVector> vectors;
  std::vector<SequenceSegment> segments;
  std::vector<std::string> warnings;
};

// Full ingestion: read, heartbeat-filter, bind or fit profiles, resolve,
// merge, coalesce, segment. Profiles resolve in priority order: `profiles`
// argument, config-inline profiles, fit from this input's readings (train
// path only; pass fit_profiles = false to require bound profiles instead).
IngestOutput ingest_logs(const PipelineConfig& cfg,
                         const std::string& behavior_path,
                         const std::string& presence_path,
                         const std::map<DeviceKind, DeviceProfile>* profiles,
                         bool fit_profiles);

struct TrainOutput {
  HmmModel model;
  Threshold threshold;
  std::map<DeviceKind, DeviceProfile> profiles;
  TrainResult train_result;
  std::size_t segment_count = 0;
  std::size_t sequence_count = 0;  // expanded training sequences
  std::vector<std::string> warnings;
};

// Fits profiles (unless bound), expands every segment into scalar training
// sequences, trains the HMM, and calibrates the threshold on the same
// segments.
TrainOutput train_pipeline(const PipelineConfig& cfg,
                           const std::string& behavior_path,
                           const std::string& presence_path);

std::string train_report_json(const TrainOutput& out);

struct ScoreOutput {
  std::vector<AnomalyAlert> alerts;
  std::vector<WindowRecord> windows;
  std::vector<std::string> warnings;
};

// Scores logs against a trained model + threshold. Profiles must be the
// ones frozen at training time.
ScoreOutput score_pipeline(const PipelineConfig& cfg, const HmmModel& model,
                           const Threshold& threshold,
                           const std::map<DeviceKind, DeviceProfile>& profiles,
                           const std::string& behavior_path,
                           const std::string& presence_path);

struct SplitOutput {
  std::vector<RawEvent> train_behavior;
  std::vector<RawEvent> train_presence;
  std::vector<RawEvent> test_behavior;
  std::vector<RawEvent> test_presence;
  TimePoint boundary = 0;
  std::size_t train_segments = 0;
  std::size_t test_segments = 0;
};

// Chronological split of raw logs at a segment boundary. Segmentation here
// depends only on timestamps, so no profiles are needed and the boundary
// matches the symbol-level pipeline exactly.
SplitOutput split_logs(const PipelineConfig& cfg,
                       const std::string& behavior_path,
                       const std::string& presence_path, double fraction);

struct SweepRow {
  std::size_t n_states = 0;
  double train_total_ll = 0.0;
  double heldout_mean_ll = 0.0;  // per held-out expanded sequence
  std::size_t iterations = 0;
  bool converged = false;
};

// Trains one model per candidate N on the first `fraction` of segments and
// reports held-out log-likelihood, for choosing the state count.
std::vector<SweepRow> sweep_states(const PipelineConfig& cfg,
                                   const std::string& behavior_path,
                                   const std::string& presence_path,
                                   const std::vector<std::size_t>& state_counts,
                                   double fraction);

std::string metrics_report_json(const EvalReport& report);
std::string confusion_table_text(const EvalReport& report);

struct BenchmarkOutput {
  EvalReport report;
  std::size_t normal_test_windows = 0;
  std::size_t segment_count = 0;  // over the full simulated period
  double scenario_recall = 0.0;
  double window_fpr = 0.0;
};

// End-to-end protocol: simulate `days`, split 70/30 chronologically, train
// and calibrate on the first part, inject the 8 crafted scenarios plus
// `random_count` random perturbations into the test part, score, and
// evaluate. All artifacts are written under out_dir; outputs are
// byte-deterministic given (cfg, days, seed).
BenchmarkOutput run_benchmark(const PipelineConfig& cfg, std::size_t days,
                              std::uint64_t seed, std::size_t random_count,
                              const std::string& out_dir);

}  // namespace rpmguard
