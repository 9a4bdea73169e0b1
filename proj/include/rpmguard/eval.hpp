#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rpmguard/detector.hpp"
#include "rpmguard/events.hpp"

namespace rpmguard {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  double accuracy() const;
  std::optional<double> precision() const;  // undefined when tp + fp == 0
  std::optional<double> recall() const;     // undefined when tp + fn == 0
  std::optional<double> fpr() const;        // undefined when fp + tn == 0
};

// Ground-truth anomaly interval. scenario is 1..8 for the crafted scenarios
// and 0 for random status perturbations.
struct LabelInterval {
  TimePoint start = 0;
  TimePoint end = 0;
  int scenario = 0;
};

struct EvalReport {
  ConfusionMatrix windows;          // per evaluated window
  std::size_t labels_total = 0;     // injected anomaly count
  std::size_t labels_detected = 0;  // labels with at least one alert overlap
  std::vector<int> missed_scenarios;  // scenario ids of undetected labels
};

// Chronological split at the fraction boundary (nearest segment count,
// clamped so both sides are non-empty). Throws InvalidInputError for fewer
// than 2 segments or a fraction outside (0, 1).
std::pair<std::vector<SequenceSegment>, std::vector<SequenceSegment>> split(
    std::span<const SequenceSegment> segments, double fraction);

// Classifies every evaluated window: TP when an alerted window intersects a
// label interval, FP when alerted without one, FN when a labeled window was
// not alerted, TN otherwise. Intervals are closed; any intersection counts.
// Throws ProtocolError when a window appears twice.
EvalReport evaluate(std::span<const AnomalyAlert> alerts,
                    std::span<const LabelInterval> labels,
                    std::span<const WindowRecord> evaluated_windows);

}  // namespace rpmguard
