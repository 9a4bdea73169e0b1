#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rpmguard/detector.hpp"
#include "rpmguard/eval.hpp"
#include "rpmguard/events.hpp"

namespace rpmguard {

// Day applicability: `workday` means a weekday spent away at work; `home`
// covers weekends and work-from-home weekdays.
enum class DayFilter { kAll, kWeekday, kWeekend, kWorkday, kHomeday };

// One recurring activity in the daily routine. Kinds and their event
// blocks:
//   wake / bed / bedroom_visit / night_wake   bd_open then bd_close
//   vitals          oximeter reading then scale reading, phone-2 wrapping
//   vitals_ox       oximeter reading only
//   night_wake_check  bd_open, oximeter check, bd_close
//   meal / snack    fd_open then fd_close
//   leave / return  ph1_out / ph1_in
//   short_errand    ph1_out then ph1_in within the segmentation gap
struct ScheduleEntry {
  std::string kind;
  int start_minute = 0;      // nominal minutes after UTC midnight
  double jitter_min = 2.0;   // gaussian sigma in minutes, clamped at 3 sigma
  DayFilter days = DayFilter::kAll;
  double probability = 1.0;  // per-day chance the activity happens
};

struct RoutineSpec {
  std::vector<ScheduleEntry> schedule;
  // Vital-reading distributions; draws are truncated at +-1.9 sigma so a
  // stable patient's normal logs stay inside the +-2 sigma bands.
  double oximeter_mu = 97.0;
  double oximeter_sigma = 1.15;
  double scale_mu = 80.0;
  double scale_sigma = 1.0;
  TimePoint start_ts = 1767571200;  // 2026-01-05T00:00:00Z, a Monday
  Duration scenario_time_frame = 600;  // "within a time frame" in scenarios
  double home_day_probability = 0.40;  // chance a weekday is spent at home

  // Checks that entries which can share a day cannot collide after 3-sigma
  // jitter plus block duration.
  void validate() const;
};

RoutineSpec default_routine();

struct SimulatedLogs {
  std::vector<RawEvent> behavior;
  std::vector<RawEvent> presence;
};

// Generates `days` days of normal-behavior logs. Deterministic given
// (spec, days, seed); per-day streams use sub-seeds derived from `seed`.
SimulatedLogs simulate_days(const RoutineSpec& spec, std::size_t days,
                            std::uint64_t seed);

struct ScenarioInfo {
  int id;
  std::string summary;
  std::string precondition;
};

// The eight crafted anomaly scenarios.
const std::vector<ScenarioInfo>& scenario_catalog();

// Human-readable catalog document (ids, descriptions, parameters).
std::string scenario_catalog_text();

struct InjectionResult {
  SimulatedLogs logs;
  LabelInterval label;
};

// Injects crafted scenario `scenario_id` (1..8) at time `at`. Validates the
// scenario's precondition (presence state, absence of conflicting events)
// and throws InvalidInputError instead of silently adjusting. The label
// interval covers every mutated event.
InjectionResult inject_scenario(const SimulatedLogs& logs,
                                const RoutineSpec& spec, int scenario_id,
                                TimePoint at, std::uint64_t seed);

// Picks a deterministic eligible injection time for the scenario, avoiding
// `exclusions`. Throws InvalidInputError when the log has no eligible slot.
TimePoint find_injection_time(const SimulatedLogs& logs,
                              const RoutineSpec& spec, int scenario_id,
                              std::uint64_t seed,
                              std::span<const LabelInterval> exclusions = {});

struct MutationResult {
  SimulatedLogs logs;
  std::vector<LabelInterval> labels;
};

// Injects all eight crafted scenarios at auto-picked times.
MutationResult inject_all_scenarios(const SimulatedLogs& logs,
                                    const RoutineSpec& spec,
                                    std::uint64_t seed);

// Applies `count` random status perturbations, each on a distinct normal
// window: oximeter readings in the lower band become explicit ox3 statuses,
// ph2_on becomes ph2_off, ph1_in becomes ph1_out. Windows overlapping
// `exclusions` are not candidates. Throws InvalidInputError when fewer than
// `count` candidate windows exist.
MutationResult generate_random_anomalies(
    const SimulatedLogs& logs, const DeviceRegistry& registry,
    const std::map<DeviceKind, DeviceProfile>& profiles,
    const DetectorConfig& detector_cfg, Duration coalesce_window,
    Duration heartbeat_tolerance, Duration gap_threshold,
    std::size_t max_segment_len, std::size_t count, std::uint64_t seed,
    std::span<const LabelInterval> exclusions = {});

}  // namespace rpmguard
