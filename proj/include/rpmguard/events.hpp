#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpmguard/alphabet.hpp"
#include "rpmguard/discretizer.hpp"
#include "rpmguard/timeutil.hpp"

namespace rpmguard {

// One line of an event log, before symbol resolution. Exactly one of
// `status` / `reading` is set; readings only occur for health devices and
// are discretized against the device's bound profile.
struct RawEvent {
  TimePoint ts = 0;
  std::string device;
  std::optional<std::string> status;
  std::optional<double> reading;
};

struct SensorEvent {
  TimePoint ts = 0;
  std::string device;
  int symbol = 0;
};

// A set of symbols coalesced as simultaneous at one hidden-state step.
struct ObservationVector {
  std::size_t state_index = 0;
  TimePoint ts = 0;
  std::vector<int> symbols;  // sorted ascending, unique
};

struct SequenceSegment {
  std::vector<ObservationVector> vectors;
  TimePoint start_ts = 0;
  TimePoint end_ts = 0;
  std::string source_day;  // UTC date of the first vector
};

// Maps device ids to kinds. Every device appearing in a log must be
// registered.
struct DeviceRegistry {
  std::map<std::string, DeviceKind> devices;

  DeviceKind kind_of(const std::string& device_id) const;
  bool contains(const std::string& device_id) const {
    return devices.count(device_id) != 0;
  }
};

// The default single-patient testbed: one device per kind, ids equal to the
// kind names.
DeviceRegistry default_registry();

struct Timeline {
  std::vector<SensorEvent> events;
  std::vector<std::string> warnings;
};

// Resolves raw records to symbol events: statuses are checked against the
// device's legal subset, readings are discretized via the kind's profile.
// Throws IngestionError for unregistered devices, illegal statuses, or
// readings without a bound profile.
std::vector<SensorEvent> resolve_events(
    std::span<const RawEvent> raw, const DeviceRegistry& registry,
    const std::map<DeviceKind, DeviceProfile>& profiles);

// Merges the behavioral and presence streams into one timeline ordered by
// timestamp, behavioral first on ties. Inputs are sorted individually if
// needed; an input out of order by more than `clock_skew` produces a warning
// record (the event is kept in corrected order).
Timeline merge_logs(std::span<const SensorEvent> behavior_events,
                    std::span<const SensorEvent> presence_events,
                    const DeviceRegistry& registry, Duration clock_skew = 0);

// Drops periodic re-sends: a record repeating its device's previous status
// within `tolerance` seconds is a heartbeat, not a transition. Re-activations
// farther apart are kept; reading records always pass. Applied to raw
// records (before symbol resolution) so that timestamp-only passes see the
// same stream.
std::vector<RawEvent> filter_heartbeats(std::span<const RawEvent> records,
                                        Duration tolerance);

// Groups events whose timestamps fall within `window` seconds of the group's
// first event into one ObservationVector. Within a group, a later event from
// the same device replaces the earlier one. Vector timestamps are the group
// anchors, so re-coalescing with the same window is a no-op.
std::vector<ObservationVector> coalesce(std::span<const SensorEvent> events,
                                        Duration window);

// Splits the vector stream into segments: a new segment starts when the
// inter-vector gap exceeds `gap_threshold` or the current segment reaches
// `max_len` vectors. No vector is dropped.
std::vector<SequenceSegment> segment(std::span<const ObservationVector> vectors,
                                     Duration gap_threshold,
                                     std::size_t max_len);

// Cartesian expansion of a window: one scalar sequence per choice of a
// single symbol from each vector, enumerated lexicographically by symbol
// code. Throws ExpansionOverflowError (naming the window) when the count
// would exceed `cap`, and InvalidInputError on an empty window.
std::vector<std::vector<int>> expand(std::span<const ObservationVector> window,
                                     std::size_t cap = 4096);

// Number of sequences expand() would produce, saturated at cap + 1.
std::size_t expansion_count(std::span<const ObservationVector> window,
                            std::size_t cap);

// The scorable windows of a segment: all length-m runs when the segment has
// at least m vectors, otherwise the whole segment as a single short window.
std::vector<std::span<const ObservationVector>> windows_of(
    const SequenceSegment& seg, std::size_t window_len);

}  // namespace rpmguard
