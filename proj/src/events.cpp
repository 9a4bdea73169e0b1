#include "rpmguard/events.hpp"

#include <algorithm>

#include "rpmguard/errors.hpp"

namespace rpmguard {

DeviceKind DeviceRegistry::kind_of(const std::string& device_id) const {
  auto it = devices.find(device_id);
  if (it == devices.end()) {
    throw IngestionError("unregistered device '" + device_id + "'");
  }
  return it->second;
}

DeviceRegistry default_registry() {
  DeviceRegistry reg;
  reg.devices = {
      {"bedroom_door", DeviceKind::kBedroomDoor},
      {"fridge_door", DeviceKind::kFridgeDoor},
      {"scale", DeviceKind::kScale},
      {"oximeter", DeviceKind::kOximeter},
      {"phone2", DeviceKind::kPhone2},
      {"phone1", DeviceKind::kPhone1},
  };
  return reg;
}

std::vector<SensorEvent> resolve_events(
    std::span<const RawEvent> raw, const DeviceRegistry& registry,
    const std::map<DeviceKind, DeviceProfile>& profiles) {
  std::vector<SensorEvent> out;
  out.reserve(raw.size());
  for (const auto& rec : raw) {
    const DeviceKind kind = registry.kind_of(rec.device);
    int symbol;
    if (rec.status.has_value()) {
      symbol = symbol_code(*rec.status);
      if (!symbol_legal_for(kind, symbol)) {
        throw IngestionError("device '" + rec.device + "' (" +
                             device_kind_name(kind) +
                             ") cannot emit status '" + *rec.status + "'");
      }
    } else {
      if (!has_readings(kind)) {
        throw IngestionError("device '" + rec.device +
                             "' does not report numeric readings");
      }
      auto it = profiles.find(kind);
      if (it == profiles.end()) {
        throw IngestionError("no profile bound for '" +
                             device_kind_name(kind) +
                             "'; cannot discretize reading");
      }
      symbol = discretize(it->second, *rec.reading);
    }
    out.push_back(SensorEvent{rec.ts, rec.device, symbol});
  }
  return out;
}

namespace {

// Sorts one input stream, recording a warning when it was out of order by
// more than the allowed skew.
std::vector<SensorEvent> sorted_stream(std::span<const SensorEvent> events,
                                       const char* label, Duration skew,
                                       std::vector<std::string>& warnings) {
  std::vector<SensorEvent> v(events.begin(), events.end());
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i].ts + skew < v[i - 1].ts) {
      warnings.push_back(std::string(label) + " log out of order at " +
                         format_iso8601(v[i].ts) + " (device '" +
                         v[i].device + "'); event kept in corrected order");
    }
  }
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.ts < b.ts;
  });
  return v;
}

}  // namespace

Timeline merge_logs(std::span<const SensorEvent> behavior_events,
                    std::span<const SensorEvent> presence_events,
                    const DeviceRegistry& registry, Duration clock_skew) {
  Timeline out;
  for (const auto& e : behavior_events) registry.kind_of(e.device);
  for (const auto& e : presence_events) registry.kind_of(e.device);
  auto behavior =
      sorted_stream(behavior_events, "behavior", clock_skew, out.warnings);
  auto presence =
      sorted_stream(presence_events, "presence", clock_skew, out.warnings);
  out.events.reserve(behavior.size() + presence.size());
  // Behavioral events win ties, so merge with strict < on the presence side.
  std::size_t bi = 0, pi = 0;
  while (bi < behavior.size() || pi < presence.size()) {
    if (pi == presence.size() ||
        (bi < behavior.size() && behavior[bi].ts <= presence[pi].ts)) {
      out.events.push_back(std::move(behavior[bi++]));
    } else {
      out.events.push_back(std::move(presence[pi++]));
    }
  }
  return out;
}

std::vector<RawEvent> filter_heartbeats(std::span<const RawEvent> records,
                                        Duration tolerance) {
  std::vector<RawEvent> out;
  out.reserve(records.size());
  struct Last {
    std::string status;
    TimePoint ts;
  };
  std::map<std::string, Last> last_seen;
  for (const auto& rec : records) {
    if (!rec.status.has_value()) {
      out.push_back(rec);  // readings are measurements, never re-sends
      continue;
    }
    auto it = last_seen.find(rec.device);
    const bool heartbeat = it != last_seen.end() &&
                           it->second.status == *rec.status &&
                           rec.ts - it->second.ts <= tolerance;
    last_seen[rec.device] = Last{*rec.status, rec.ts};
    if (!heartbeat) out.push_back(rec);
  }
  return out;
}

std::vector<ObservationVector> coalesce(std::span<const SensorEvent> events,
                                        Duration window) {
  std::vector<ObservationVector> out;
  std::size_t i = 0;
  while (i < events.size()) {
    const TimePoint anchor = events[i].ts;
    std::map<std::string, int> per_device;  // later events replace earlier
    std::size_t j = i;
    while (j < events.size() && events[j].ts - anchor <= window) {
      per_device[events[j].device] = events[j].symbol;
      ++j;
    }
    ObservationVector vec;
    vec.state_index = out.size();
    vec.ts = anchor;
    for (const auto& [device, symbol] : per_device) {
      vec.symbols.push_back(symbol);
    }
    std::sort(vec.symbols.begin(), vec.symbols.end());
    vec.symbols.erase(std::unique(vec.symbols.begin(), vec.symbols.end()),
                      vec.symbols.end());
    out.push_back(std::move(vec));
    i = j;
  }
  return out;
}

std::vector<SequenceSegment> segment(
    std::span<const ObservationVector> vectors, Duration gap_threshold,
    std::size_t max_len) {
  if (max_len == 0) throw InvalidInputError("max_len must be positive");
  std::vector<SequenceSegment> out;
  SequenceSegment cur;
  auto flush = [&] {
    if (cur.vectors.empty()) return;
    cur.start_ts = cur.vectors.front().ts;
    cur.end_ts = cur.vectors.back().ts;
    cur.source_day = utc_date(cur.start_ts);
    out.push_back(std::move(cur));
    cur = SequenceSegment{};
  };
  for (const auto& vec : vectors) {
    if (!cur.vectors.empty() &&
        (vec.ts - cur.vectors.back().ts > gap_threshold ||
         cur.vectors.size() >= max_len)) {
      flush();
    }
    cur.vectors.push_back(vec);
  }
  flush();
  return out;
}

std::size_t expansion_count(std::span<const ObservationVector> window,
                            std::size_t cap) {
  std::size_t count = 1;
  for (const auto& vec : window) {
    const std::size_t k = vec.symbols.size();
    if (k == 0) continue;
    if (count > cap / k) return cap + 1;  // would exceed cap; avoid overflow
    count *= k;
  }
  return count;
}

std::vector<std::vector<int>> expand(std::span<const ObservationVector> window,
                                     std::size_t cap) {
  if (window.empty()) {
    throw InvalidInputError("cannot expand an empty window");
  }
  for (const auto& vec : window) {
    if (vec.symbols.empty()) {
      throw InvalidInputError("observation vector at " +
                              format_iso8601(vec.ts) + " has no symbols");
    }
  }
  const std::size_t count = expansion_count(window, cap);
  if (count > cap) {
    throw ExpansionOverflowError(
        "window " + format_iso8601(window.front().ts) + " .. " +
        format_iso8601(window.back().ts) + " expands to more than " +
        std::to_string(cap) + " sequences");
  }
  // Odometer over the per-vector symbol lists (already sorted ascending);
  // the last step varies fastest, so output order is lexicographic.
  std::vector<std::vector<int>> out;
  out.reserve(count);
  std::vector<std::size_t> idx(window.size(), 0);
  for (;;) {
    std::vector<int> seq(window.size());
    for (std::size_t t = 0; t < window.size(); ++t) {
      seq[t] = window[t].symbols[idx[t]];
    }
    out.push_back(std::move(seq));
    std::size_t t = window.size();
    while (t-- > 0) {
      if (++idx[t] < window[t].symbols.size()) break;
      idx[t] = 0;
      if (t == 0) return out;
    }
  }
}

std::vector<std::span<const ObservationVector>> windows_of(
    const SequenceSegment& seg, std::size_t window_len) {
  std::vector<std::span<const ObservationVector>> out;
  const auto& v = seg.vectors;
  if (v.empty()) return out;
  if (v.size() < window_len) {
    out.emplace_back(v.data(), v.size());
    return out;
  }
  for (std::size_t i = 0; i + window_len <= v.size(); ++i) {
    out.emplace_back(v.data() + i, window_len);
  }
  return out;
}

}  // namespace rpmguard
