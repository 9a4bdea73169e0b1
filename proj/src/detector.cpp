#include "rpmguard/detector.hpp"

#include <algorithm>
#include <limits>

#include "rpmguard/errors.hpp"

namespace rpmguard {

void DetectorConfig::validate() const {
  if (window_len < 2) {
    throw InvalidInputError("window_len must be at least 2");
  }
  if (threshold_margin < 0.0) {
    throw InvalidInputError("threshold_margin must be non-negative");
  }
  if (expansion_cap == 0) {
    throw InvalidInputError("expansion_cap must be positive");
  }
}

namespace {

// Scores one window, records it, and appends an alert when the minimum
// expanded sequence falls strictly below the cutoff. A window whose
// expansion exceeds the cap is flagged for manual review via a warning
// record and skipped, never silently dropped.
void score_and_collect(const HmmModel& model, const Threshold& threshold,
                       std::span<const ObservationVector> window,
                       const DetectorConfig& cfg,
                       std::vector<AnomalyAlert>& alerts,
                       std::vector<std::string>* warnings,
                       std::vector<WindowRecord>* window_records) {
  std::vector<ObservationSequence> sequences;
  try {
    sequences = expand(window, cfg.expansion_cap);
  } catch (const ExpansionOverflowError& e) {
    if (warnings) {
      warnings->push_back(std::string(e.what()) +
                          "; window flagged for manual review");
    }
    return;
  }
  double min_lp = std::numeric_limits<double>::infinity();
  std::size_t min_idx = 0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const double lp = forward_log_likelihood(model, sequences[i]);
    if (lp < min_lp) {
      min_lp = lp;
      min_idx = i;
    }
  }
  const bool alerted = min_lp < threshold.cutoff;
  if (window_records) {
    window_records->push_back(WindowRecord{window.front().ts,
                                           window.back().ts, min_lp, alerted});
  }
  if (alerted) {
    alerts.push_back(AnomalyAlert{window.front().ts, window.back().ts,
                                  sequences[min_idx], min_lp,
                                  threshold.cutoff});
  }
}

}  // namespace

Threshold calibrate_threshold(const HmmModel& model,
                              std::span<const SequenceSegment> segments,
                              const DetectorConfig& cfg) {
  cfg.validate();
  model.validate();
  if (segments.empty()) {
    throw CalibrationError("cannot calibrate on an empty training set");
  }
  Threshold th;
  th.window_len = cfg.window_len;
  th.alphabet_tag = model.alphabet_tag;
  th.train_min = std::numeric_limits<double>::infinity();
  th.train_max = -std::numeric_limits<double>::infinity();
  for (const auto& seg : segments) {
    for (const auto window : windows_of(seg, cfg.window_len)) {
      for (const auto& scored : score_window(model, window, cfg)) {
        th.train_min = std::min(th.train_min, scored.log_prob);
        th.train_max = std::max(th.train_max, scored.log_prob);
        ++th.sequence_count;
      }
    }
  }
  if (th.sequence_count == 0) {
    throw CalibrationError("training segments produced no windows");
  }
  th.cutoff = th.train_min - cfg.threshold_margin;
  return th;
}

std::vector<ScoredSequence> score_window(
    const HmmModel& model, std::span<const ObservationVector> window,
    const DetectorConfig& cfg) {
  const auto sequences = expand(window, cfg.expansion_cap);
  std::vector<ScoredSequence> out;
  out.reserve(sequences.size());
  for (const auto& seq : sequences) {
    out.push_back(ScoredSequence{seq, forward_log_likelihood(model, seq)});
  }
  return out;
}

std::vector<AnomalyAlert> detect_stream(
    const HmmModel& model, const Threshold& threshold,
    std::span<const ObservationVector> stream, const DetectorConfig& cfg,
    std::vector<std::string>* warnings,
    std::vector<WindowRecord>* window_records) {
  cfg.validate();
  std::vector<AnomalyAlert> alerts;
  const std::size_t m = cfg.window_len;
  if (stream.size() < m) {
    if (warnings) {
      warnings->push_back("stream of " + std::to_string(stream.size()) +
                          " vectors is shorter than window length " +
                          std::to_string(m) + "; nothing scored");
    }
    return alerts;
  }
  for (std::size_t i = 0; i + m <= stream.size(); ++i) {
    score_and_collect(model, threshold, stream.subspan(i, m), cfg, alerts,
                      warnings, window_records);
  }
  return alerts;
}

std::vector<AnomalyAlert> scan_segments(
    const HmmModel& model, const Threshold& threshold,
    std::span<const SequenceSegment> segments, const DetectorConfig& cfg,
    std::vector<std::string>* warnings,
    std::vector<WindowRecord>* window_records) {
  cfg.validate();
  if (!threshold.alphabet_tag.empty() && !model.alphabet_tag.empty() &&
      threshold.alphabet_tag != model.alphabet_tag) {
    throw InvalidInputError("threshold alphabet '" + threshold.alphabet_tag +
                            "' does not match model alphabet '" +
                            model.alphabet_tag + "'");
  }
  if (threshold.window_len != 0 && threshold.window_len != cfg.window_len) {
    throw InvalidInputError(
        "window_len " + std::to_string(cfg.window_len) +
        " differs from the calibrated window length " +
        std::to_string(threshold.window_len));
  }
  std::vector<AnomalyAlert> alerts;
  for (const auto& seg : segments) {
    if (seg.vectors.size() >= cfg.window_len) {
      auto seg_alerts = detect_stream(model, threshold, seg.vectors, cfg,
                                      warnings, window_records);
      alerts.insert(alerts.end(), seg_alerts.begin(), seg_alerts.end());
    } else if (!seg.vectors.empty()) {
      score_and_collect(model, threshold, seg.vectors, cfg, alerts, warnings,
                        window_records);
    }
  }
  return alerts;
}

std::vector<AlertSpan> merge_alert_spans(
    std::span<const AnomalyAlert> alerts) {
  std::vector<AlertSpan> spans;
  for (const auto& alert : alerts) {
    // Consecutive windows share vectors exactly when their time ranges
    // overlap, since the window advances one vector per step.
    if (!spans.empty() && alert.window_start <= spans.back().end) {
      auto& span = spans.back();
      span.end = std::max(span.end, alert.window_end);
      ++span.window_count;
      if (alert.log_prob < span.min_log_prob) {
        span.min_log_prob = alert.log_prob;
        span.worst_sequence = alert.sequence;
      }
    } else {
      spans.push_back(AlertSpan{alert.window_start, alert.window_end, 1,
                                alert.log_prob, alert.sequence});
    }
  }
  return spans;
}

}  // namespace rpmguard
