#include "rpmguard/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rpmguard/errors.hpp"

namespace rpmguard {

double ConfusionMatrix::accuracy() const {
  const std::uint64_t n = total();
  if (n == 0) return 1.0;
  return static_cast<double>(tp + tn) / static_cast<double>(n);
}

std::optional<double> ConfusionMatrix::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> ConfusionMatrix::recall() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> ConfusionMatrix::fpr() const {
  if (fp + tn == 0) return std::nullopt;
  return static_cast<double>(fp) / static_cast<double>(fp + tn);
}

std::pair<std::vector<SequenceSegment>, std::vector<SequenceSegment>> split(
    std::span<const SequenceSegment> segments, double fraction) {
  if (segments.size() < 2) {
    throw InvalidInputError("need at least 2 segments to split");
  }
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw InvalidInputError("split fraction must lie in (0, 1)");
  }
  auto cut = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(segments.size())));
  cut = std::clamp<std::size_t>(cut, 1, segments.size() - 1);
  std::vector<SequenceSegment> train(segments.begin(), segments.begin() + cut);
  std::vector<SequenceSegment> test(segments.begin() + cut, segments.end());
  return {std::move(train), std::move(test)};
}

namespace {

bool intersects(TimePoint a_start, TimePoint a_end, TimePoint b_start,
                TimePoint b_end) {
  return a_start <= b_end && b_start <= a_end;
}

}  // namespace

EvalReport evaluate(std::span<const AnomalyAlert> alerts,
                    std::span<const LabelInterval> labels,
                    std::span<const WindowRecord> evaluated_windows) {
  std::set<std::pair<TimePoint, TimePoint>> seen;
  for (const auto& w : evaluated_windows) {
    if (!seen.insert({w.start, w.end}).second) {
      throw ProtocolError("window " + format_iso8601(w.start) + " .. " +
                          format_iso8601(w.end) + " evaluated twice");
    }
  }
  std::set<std::pair<TimePoint, TimePoint>> alerted;
  for (const auto& a : alerts) {
    alerted.insert({a.window_start, a.window_end});
  }

  EvalReport report;
  for (const auto& w : evaluated_windows) {
    const bool is_alerted = alerted.count({w.start, w.end}) != 0;
    const bool is_labeled =
        std::any_of(labels.begin(), labels.end(), [&](const auto& l) {
          return intersects(w.start, w.end, l.start, l.end);
        });
    if (is_alerted && is_labeled) {
      ++report.windows.tp;
    } else if (is_alerted) {
      ++report.windows.fp;
    } else if (is_labeled) {
      ++report.windows.fn;
    } else {
      ++report.windows.tn;
    }
  }

  report.labels_total = labels.size();
  for (const auto& l : labels) {
    const bool detected =
        std::any_of(alerts.begin(), alerts.end(), [&](const auto& a) {
          return intersects(a.window_start, a.window_end, l.start, l.end);
        });
    if (detected) {
      ++report.labels_detected;
    } else {
      report.missed_scenarios.push_back(l.scenario);
    }
  }
  std::sort(report.missed_scenarios.begin(), report.missed_scenarios.end());
  return report;
}

}  // namespace rpmguard
