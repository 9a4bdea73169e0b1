#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rpmguard/detector.hpp"
#include "rpmguard/discretizer.hpp"
#include "rpmguard/eval.hpp"
#include "rpmguard/events.hpp"

namespace rpmguard {

// Event logs are line-delimited JSON records:
//   {"device":"oximeter","reading":97.2,"ts":"2026-01-05T07:31:20Z"}
//   {"device":"bedroom_door","status":"bd_open","ts":"2026-01-05T07:02:10Z"}
// `ts` and `device` are required; exactly one of `status` / `reading` is
// set. Unknown fields are rejected, naming the field and line.
RawEvent parse_event_record(const std::string& line, std::size_t line_number);
std::vector<RawEvent> read_event_log(const std::string& path);
void write_event_log(const std::string& path,
                     std::span<const RawEvent> records);
std::string event_record_to_json(const RawEvent& rec);

// Labels: {"end":"...","scenario":3,"start":"..."}; scenario 0 marks a
// random perturbation.
std::vector<LabelInterval> read_labels(const std::string& path);
void write_labels(const std::string& path,
                  std::span<const LabelInterval> labels);

// Alerts: window bounds, the minimum-scoring expanded sequence (symbol
// names), its log-prob, and the threshold in force.
std::vector<AnomalyAlert> read_alerts(const std::string& path);
void write_alerts(const std::string& path,
                  std::span<const AnomalyAlert> alerts);

// Per-window score dump (plot data + evaluation input).
std::vector<WindowRecord> read_window_records(const std::string& path);
void write_window_records(const std::string& path,
                          std::span<const WindowRecord> records);

// Versioned threshold document (JSON object).
std::string serialize_threshold(const Threshold& threshold);
Threshold deserialize_threshold(const std::string& text);

// Versioned profiles document: one entry per reading-capable device kind.
std::string serialize_profiles(
    const std::map<DeviceKind, DeviceProfile>& profiles);
std::map<DeviceKind, DeviceProfile> deserialize_profiles(
    const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rpmguard
