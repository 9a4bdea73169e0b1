#pragma once

#include <span>
#include <string>
#include <vector>

#include "rpmguard/events.hpp"
#include "rpmguard/hmm.hpp"

namespace rpmguard {

struct DetectorConfig {
  std::size_t window_len = 5;     // m, sliding-window length (>= 2)
  double threshold_margin = 0.0;  // headroom subtracted from the cutoff
  std::size_t expansion_cap = 4096;

  void validate() const;
};

// Calibrated anomaly cutoff: the minimum log-probability over all expanded
// training windows, minus the margin.
struct Threshold {
  double cutoff = 0.0;
  double train_min = 0.0;        // minimum training window log-prob
  double train_max = 0.0;        // maximum training window log-prob
  std::size_t sequence_count = 0;  // expanded sequences scored in calibration
  std::size_t window_len = 0;      // m used during calibration
  std::string alphabet_tag;
};

struct ScoredSequence {
  ObservationSequence sequence;
  double log_prob = 0.0;
};

struct AnomalyAlert {
  TimePoint window_start = 0;
  TimePoint window_end = 0;
  ObservationSequence sequence;  // the minimum-scoring expanded sequence
  double log_prob = 0.0;         // strictly below cutoff
  double cutoff = 0.0;
};

// Per-window score record, emitted for evaluation and plotting.
struct WindowRecord {
  TimePoint start = 0;
  TimePoint end = 0;
  double min_log_prob = 0.0;
  bool alerted = false;
};

// A run of consecutive alerting windows collapsed for human-readable output.
struct AlertSpan {
  TimePoint start = 0;
  TimePoint end = 0;
  std::size_t window_count = 0;
  double min_log_prob = 0.0;
  ObservationSequence worst_sequence;
};

// Scores every window of every training segment (length-m runs; segments
// shorter than m as one whole window) and sets
//   cutoff = min(log-probs) - cfg.threshold_margin.
// Throws CalibrationError when there are no segments or no windows.
Threshold calibrate_threshold(const HmmModel& model,
                              std::span<const SequenceSegment> segments,
                              const DetectorConfig& cfg);

// Expands the window and scores each sequence; one entry per expanded
// sequence, in expansion (lexicographic) order. Throws
// ExpansionOverflowError when the expansion exceeds cfg.expansion_cap.
std::vector<ScoredSequence> score_window(
    const HmmModel& model, std::span<const ObservationVector> window,
    const DetectorConfig& cfg);

// Slides a length-m window over the stream, one vector per step. A window
// yields at most one alert, carrying its minimum-scoring sequence; alerts
// are ordered by window end time. A stream shorter than m yields no alerts
// and a warning record. Appends every scored window to `window_records`
// when non-null.
std::vector<AnomalyAlert> detect_stream(
    const HmmModel& model, const Threshold& threshold,
    std::span<const ObservationVector> stream, const DetectorConfig& cfg,
    std::vector<std::string>* warnings = nullptr,
    std::vector<WindowRecord>* window_records = nullptr);

// Pipeline-level scan: detect_stream within each segment, scoring segments
// shorter than m as one whole window so that sparse activity (away periods)
// is still evaluated. Windows never span segmentation gaps, matching how
// the threshold was calibrated.
std::vector<AnomalyAlert> scan_segments(
    const HmmModel& model, const Threshold& threshold,
    std::span<const SequenceSegment> segments, const DetectorConfig& cfg,
    std::vector<std::string>* warnings = nullptr,
    std::vector<WindowRecord>* window_records = nullptr);

// Merges consecutive alerting windows that share a vector into one span.
std::vector<AlertSpan> merge_alert_spans(std::span<const AnomalyAlert> alerts);

}  // namespace rpmguard
