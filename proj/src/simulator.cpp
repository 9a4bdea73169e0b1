#include "rpmguard/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rpmguard/errors.hpp"
#include "rpmguard/rng.hpp"

namespace rpmguard {

namespace {

constexpr double kReadingTruncSigmas = 1.9;

double round_tenth(double x) { return std::round(x * 10.0) / 10.0; }

// Upper bound on a block's event span in seconds, used for the
// non-overlap check.
Duration block_duration(const std::string& kind) {
  if (kind == "vitals") return 300;
  if (kind == "night_wake_check") return 270;
  if (kind == "short_errand") return 2520;
  if (kind == "vitals_ox" || kind == "scale_check") return 90;
  if (kind == "meal" || kind == "snack") return 150;
  if (kind == "leave" || kind == "return") return 30;
  // wake / bed / bedroom_visit / night_wake
  return 180;
}

bool known_kind(const std::string& kind) {
  static const std::set<std::string> kKinds = {
      "wake",        "bed",      "bedroom_visit", "night_wake",
      "night_wake_check", "vitals",   "vitals_ox",     "scale_check",
      "meal",        "snack",    "leave",         "return",
      "short_errand"};
  return kKinds.count(kind) != 0;
}

bool filters_compatible(DayFilter a, DayFilter b) {
  if (a == DayFilter::kAll || b == DayFilter::kAll) return true;
  if (a == b) return true;
  auto mixes = [](DayFilter x, DayFilter y) {
    // A workday is a weekday; home days cover weekends and some weekdays.
    return (x == DayFilter::kWeekday &&
            (y == DayFilter::kWorkday || y == DayFilter::kHomeday)) ||
           (x == DayFilter::kWeekend && y == DayFilter::kHomeday) ||
           (x == DayFilter::kHomeday && y == DayFilter::kWeekend);
  };
  return mixes(a, b) || mixes(b, a);
}

bool applies_on(DayFilter f, int weekday, bool home_mode) {
  switch (f) {
    case DayFilter::kAll: return true;
    case DayFilter::kWeekday: return weekday < 5;
    case DayFilter::kWeekend: return weekday >= 5;
    case DayFilter::kWorkday: return weekday < 5 && !home_mode;
    default: return weekday >= 5 || home_mode;
  }
}

struct Emitter {
  std::vector<RawEvent>& behavior;
  std::vector<RawEvent>& presence;

  void status(TimePoint ts, const char* device, const char* name) {
    behavior.push_back(RawEvent{ts, device, name, std::nullopt});
  }
  void reading(TimePoint ts, const char* device, double value) {
    behavior.push_back(RawEvent{ts, device, std::nullopt, value});
  }
  void phone1(TimePoint ts, const char* name) {
    presence.push_back(RawEvent{ts, "phone1", name, std::nullopt});
  }
};

void emit_door_pair(Emitter& em, Rng& rng, TimePoint t) {
  em.status(t, "bedroom_door", "bd_open");
  em.status(t + 60 + static_cast<Duration>(rng.below(91)), "bedroom_door",
            "bd_close");
}

void emit_fridge_pair(Emitter& em, Rng& rng, TimePoint t) {
  em.status(t, "fridge_door", "fd_open");
  em.status(t + 45 + static_cast<Duration>(rng.below(76)), "fridge_door",
            "fd_close");
}

void emit_ox_block(Emitter& em, Rng& rng, const RoutineSpec& spec,
                   TimePoint t) {
  const double r = round_tenth(rng.truncated_normal(
      spec.oximeter_mu, spec.oximeter_sigma, kReadingTruncSigmas));
  em.reading(t, "oximeter", r);
  em.status(t, "phone2", "ph2_on");
  em.status(t + 60, "oximeter", "ox_off");
  em.status(t + 60, "phone2", "ph2_off");
}

void emit_scale_block(Emitter& em, Rng& rng, const RoutineSpec& spec,
                      TimePoint t) {
  const double r = round_tenth(rng.truncated_normal(
      spec.scale_mu, spec.scale_sigma, kReadingTruncSigmas));
  em.reading(t, "scale", r);
  em.status(t, "phone2", "ph2_on");
  em.status(t + 60, "scale", "sc_off");
  em.status(t + 60, "phone2", "ph2_off");
}

void emit_block(Emitter& em, Rng& rng, const RoutineSpec& spec,
                const std::string& kind, TimePoint t) {
  if (kind == "wake" || kind == "bed" || kind == "bedroom_visit" ||
      kind == "night_wake") {
    emit_door_pair(em, rng, t);
  } else if (kind == "meal" || kind == "snack") {
    emit_fridge_pair(em, rng, t);
  } else if (kind == "vitals_ox") {
    emit_ox_block(em, rng, spec, t);
  } else if (kind == "scale_check") {
    emit_scale_block(em, rng, spec, t);
  } else if (kind == "vitals") {
    emit_ox_block(em, rng, spec, t);
    emit_scale_block(em, rng, spec, t + 180);
  } else if (kind == "night_wake_check") {
    em.status(t, "bedroom_door", "bd_open");
    const double r = round_tenth(rng.truncated_normal(
        spec.oximeter_mu, spec.oximeter_sigma, kReadingTruncSigmas));
    em.reading(t + 90, "oximeter", r);
    em.status(t + 90, "phone2", "ph2_on");
    em.status(t + 150, "oximeter", "ox_off");
    em.status(t + 150, "phone2", "ph2_off");
    em.status(t + 210, "bedroom_door", "bd_close");
  } else if (kind == "leave") {
    em.phone1(t, "ph1_out");
  } else if (kind == "return") {
    em.phone1(t, "ph1_in");
  } else if (kind == "short_errand") {
    em.phone1(t, "ph1_out");
    // Back within the segmentation gap, so the out/in pair stays one
    // sequence and trains the away-state's continuation.
    em.phone1(t + (32 + static_cast<Duration>(rng.below(9))) * 60, "ph1_in");
  } else {
    throw InvalidInputError("unknown schedule kind '" + kind + "'");
  }
}

}  // namespace

void RoutineSpec::validate() const {
  if (!(oximeter_sigma > 0.0) || !(scale_sigma > 0.0)) {
    throw InvalidInputError("vital-reading sigma must be positive");
  }
  if (scenario_time_frame <= 0) {
    throw InvalidInputError("scenario time frame must be positive");
  }
  if (home_day_probability < 0.0 || home_day_probability > 1.0) {
    throw InvalidInputError("home_day_probability must lie in [0, 1]");
  }
  for (const auto& entry : schedule) {
    if (!known_kind(entry.kind)) {
      throw InvalidInputError("unknown schedule kind '" + entry.kind + "'");
    }
    if (entry.start_minute < 0 || entry.start_minute >= 24 * 60) {
      throw InvalidInputError("schedule time outside the day for '" +
                              entry.kind + "'");
    }
    if (entry.jitter_min < 0.0 || entry.probability < 0.0 ||
        entry.probability > 1.0) {
      throw InvalidInputError("bad jitter/probability for '" + entry.kind +
                              "'");
    }
  }
  // Entries that can share a day must not collide after 3-sigma jitter.
  std::vector<const ScheduleEntry*> sorted;
  for (const auto& e : schedule) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->start_minute < b->start_minute;
  });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const auto& a = *sorted[i];
      const auto& b = *sorted[j];
      if (!filters_compatible(a.days, b.days)) continue;
      const double a_end = a.start_minute * 60.0 + 3.0 * a.jitter_min * 60.0 +
                           static_cast<double>(block_duration(a.kind));
      const double b_begin =
          b.start_minute * 60.0 - 3.0 * b.jitter_min * 60.0;
      if (a_end > b_begin) {
        throw InvalidInputError("schedule entries '" + a.kind + "' (" +
                                std::to_string(a.start_minute) + " min) and '" +
                                b.kind + "' (" + std::to_string(b.start_minute) +
                                " min) can overlap after jitter");
      }
      break;  // only adjacent compatible entries can collide
    }
  }
}

RoutineSpec default_routine() {
  RoutineSpec spec;
  auto add = [&](const char* kind, const char* hhmm, DayFilter days,
                 double probability) {
    ScheduleEntry e;
    e.kind = kind;
    e.start_minute = ((hhmm[0] - '0') * 10 + (hhmm[1] - '0')) * 60 +
                     (hhmm[3] - '0') * 10 + (hhmm[4] - '0');
    e.jitter_min = 2.0;
    e.days = days;
    e.probability = probability;
    spec.schedule.push_back(std::move(e));
  };
  const auto work = DayFilter::kWorkday;
  const auto home = DayFilter::kHomeday;
  const auto all = DayFilter::kAll;

  // Disturbed-sleep nights: frequent brief wakes, sometimes with an oxygen
  // check.
  add("night_wake", "00:20", all, 0.60);
  add("night_wake", "01:15", all, 0.60);
  add("night_wake", "02:10", all, 0.60);
  add("night_wake_check", "03:05", all, 0.65);
  add("night_wake_check", "04:00", all, 0.60);
  add("night_wake", "04:55", all, 0.55);
  add("night_wake", "05:45", all, 0.55);

  // Office days. The 35-minute morning gaps keep the whole getting-ready
  // routine inside one sequence; evening activities are more spread out.
  add("wake", "06:25", work, 1.0);
  add("vitals_ox", "07:00", work, 1.0);
  add("meal", "07:35", work, 1.0);
  add("scale_check", "08:10", work, 1.0);
  add("leave", "08:45", work, 1.0);
  add("return", "17:30", work, 1.0);
  add("meal", "18:10", work, 1.0);
  add("vitals_ox", "19:05", work, 1.0);
  add("snack", "20:00", work, 0.85);
  add("short_errand", "20:55", work, 0.50);
  add("vitals_ox", "22:30", work, 1.0);
  add("bed", "23:25", work, 1.0);

  // Home days (weekends and work-from-home weekdays): dispersed activity
  // with prescribed oxygen checks through the day.
  add("wake", "07:00", home, 1.0);
  add("vitals_ox", "07:55", home, 1.0);
  add("meal", "08:50", home, 1.0);
  add("scale_check", "09:45", home, 1.0);
  add("vitals_ox", "10:40", home, 1.0);
  add("short_errand", "11:35", home, 0.60);
  add("vitals_ox", "12:45", home, 1.0);
  add("meal", "13:40", home, 1.0);
  add("bedroom_visit", "14:35", home, 1.0);
  add("snack", "15:30", home, 0.80);
  add("short_errand", "16:25", home, 0.50);
  add("vitals_ox", "17:50", home, 1.0);
  add("meal", "18:45", home, 1.0);
  add("bedroom_visit", "19:40", home, 0.70);
  add("snack", "20:35", home, 0.75);
  add("vitals_ox", "21:30", home, 1.0);
  add("vitals_ox", "22:25", home, 1.0);
  add("bed", "23:20", home, 1.0);
  return spec;
}

SimulatedLogs simulate_days(const RoutineSpec& spec, std::size_t days,
                            std::uint64_t seed) {
  if (days == 0) throw InvalidInputError("days must be positive");
  spec.validate();
  SimulatedLogs logs;
  Emitter em{logs.behavior, logs.presence};
  for (std::size_t day = 0; day < days; ++day) {
    Rng rng(derive_seed(seed, day));
    const TimePoint day_start =
        spec.start_ts + static_cast<TimePoint>(day) * 86400;
    const int weekday = utc_weekday(day_start);
    const bool home_mode =
        weekday < 5 && rng.uniform() < spec.home_day_probability;
    for (const auto& entry : spec.schedule) {
      if (!applies_on(entry.days, weekday, home_mode)) continue;
      if (entry.probability < 1.0 && rng.uniform() > entry.probability) {
        continue;
      }
      double jitter_min = rng.normal(0.0, entry.jitter_min);
      jitter_min = std::clamp(jitter_min, -3.0 * entry.jitter_min,
                              3.0 * entry.jitter_min);
      const TimePoint t = day_start + entry.start_minute * 60 +
                          static_cast<TimePoint>(std::llround(jitter_min * 60));
      emit_block(em, rng, spec, entry.kind, t);
    }
  }
  auto by_ts = [](const RawEvent& a, const RawEvent& b) { return a.ts < b.ts; };
  std::stable_sort(logs.behavior.begin(), logs.behavior.end(), by_ts);
  std::stable_sort(logs.presence.begin(), logs.presence.end(), by_ts);
  return logs;
}

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> kCatalog = {
      {1, "smart scale sends a reading while the user is out",
       "presence out at the injection time"},
      {2, "SpO2 very low (ox3) and the bedroom door is not activated",
       "presence in; no bedroom-door or oximeter activity within the time "
       "frame"},
      {3, "scale, oximeter and fridge door activate simultaneously while the "
          "user is out",
       "presence out at the injection time"},
      {4, "fridge door, oximeter and scale activate simultaneously while the "
          "user is at home",
       "presence in; no other activity around the injection time"},
      {5, "ox_off is not followed by an oximeter reading within the time "
          "frame",
       "no oximeter activity within the time frame"},
      {6, "sc3 followed by ox3 while the user is at home",
       "presence in; no vitals activity within the time frame"},
      {7, "bd_open and fd_open activate while the user is out",
       "presence out at the injection time"},
      {8, "bd_open followed by bd_open along with ox3",
       "presence in; no other activity around the injection time"},
  };
  return kCatalog;
}

std::string scenario_catalog_text() {
  std::ostringstream out;
  out << "rpmguard anomaly scenario catalog\n"
      << "=================================\n\n"
      << "Crafted scenarios (inject --scenario N):\n";
  for (const auto& s : scenario_catalog()) {
    out << "  " << s.id << ". " << s.summary << "\n"
        << "     requires: " << s.precondition << "\n";
  }
  out << "\nRandom perturbations (inject --random N):\n"
      << "  flips statuses of a randomly chosen normal window among the\n"
      << "  substitutions ox2->ox3, ph2_on->ph2_off, ph1_in->ph1_out;\n"
      << "  labeled with scenario id 0.\n";
  return out.str();
}

namespace {

// Presence at time t: the last phone-1 status at or before t ("in" before
// the first event).
bool presence_out_at(const std::vector<RawEvent>& presence, TimePoint t) {
  bool out = false;
  for (const auto& rec : presence) {
    if (rec.ts > t) break;
    if (rec.status.has_value()) out = (*rec.status == "ph1_out");
  }
  return out;
}

// First presence transition strictly after t, or none.
std::optional<TimePoint> next_presence_change(
    const std::vector<RawEvent>& presence, TimePoint t) {
  for (const auto& rec : presence) {
    if (rec.ts > t) return rec.ts;
  }
  return std::nullopt;
}

bool any_event_in(const std::vector<RawEvent>& events, TimePoint t0,
                  TimePoint t1, const char* device = nullptr) {
  for (const auto& rec : events) {
    if (rec.ts < t0) continue;
    if (rec.ts > t1) break;
    if (device == nullptr || rec.device == device) return true;
  }
  return false;
}

void require(bool ok, int scenario_id, const std::string& what) {
  if (!ok) {
    throw InvalidInputError("scenario " + std::to_string(scenario_id) +
                            " precondition failed: " + what);
  }
}

void require_out_through(const SimulatedLogs& logs, int id, TimePoint t0,
                         TimePoint t1) {
  require(presence_out_at(logs.presence, t0), id,
          "user must be out at " + format_iso8601(t0));
  const auto change = next_presence_change(logs.presence, t0);
  require(!change || *change > t1, id, "user returns before " +
                                            format_iso8601(t1));
}

void require_quiet(const SimulatedLogs& logs, int id, TimePoint t0,
                   TimePoint t1) {
  require(!any_event_in(logs.behavior, t0, t1) &&
              !any_event_in(logs.presence, t0, t1),
          id, "existing events between " + format_iso8601(t0) + " and " +
                  format_iso8601(t1));
}

struct Inserter {
  SimulatedLogs logs;
  TimePoint lo = 0, hi = 0;
  bool any = false;

  void track(TimePoint t) {
    lo = any ? std::min(lo, t) : t;
    hi = any ? std::max(hi, t) : t;
    any = true;
  }
  void status(TimePoint t, const char* device, const char* name) {
    logs.behavior.push_back(RawEvent{t, device, name, std::nullopt});
    track(t);
  }
  void reading(TimePoint t, const char* device, double value) {
    logs.behavior.push_back(RawEvent{t, device, std::nullopt, value});
    track(t);
  }
};

}  // namespace

InjectionResult inject_scenario(const SimulatedLogs& logs,
                                const RoutineSpec& spec, int scenario_id,
                                TimePoint at, std::uint64_t seed) {
  if (scenario_id < 1 || scenario_id > 8) {
    throw InvalidInputError("unknown scenario id " +
                            std::to_string(scenario_id));
  }
  if (logs.behavior.empty()) {
    throw InvalidInputError("cannot inject into an empty log");
  }
  const TimePoint first = logs.behavior.front().ts;
  const TimePoint last = logs.behavior.back().ts;
  if (at < first || at > last) {
    throw InvalidInputError("injection time " + format_iso8601(at) +
                            " outside the log range " + format_iso8601(first) +
                            " .. " + format_iso8601(last));
  }

  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(scenario_id)));
  const Duration tf = spec.scenario_time_frame;
  // In-band (normal-looking) and outlier reading values relative to the
  // routine's distributions.
  const double ox_low = round_tenth(spec.oximeter_mu -
                                    rng.uniform(0.2, 1.2) * spec.oximeter_sigma);
  const double ox_critical =
      round_tenth(spec.oximeter_mu - 8.0 * spec.oximeter_sigma);
  const double sc_low = round_tenth(spec.scale_mu -
                                    rng.uniform(0.2, 1.2) * spec.scale_sigma);
  const double sc_outlier = round_tenth(spec.scale_mu + 4.0 * spec.scale_sigma);

  Inserter ins{logs};
  switch (scenario_id) {
    case 1: {
      require_out_through(logs, 1, at, at + 90);
      ins.reading(at, "scale", sc_low);
      ins.status(at, "phone2", "ph2_on");
      ins.status(at + 60, "scale", "sc_off");
      ins.status(at + 60, "phone2", "ph2_off");
      break;
    }
    case 2: {
      require(!presence_out_at(logs.presence, at), 2, "user must be at home");
      require(!any_event_in(logs.behavior, at - tf, at + tf, "bedroom_door"),
              2, "bedroom door activity within the time frame");
      require(!any_event_in(logs.behavior, at - tf, at + tf, "oximeter"), 2,
              "oximeter activity within the time frame");
      ins.reading(at, "oximeter", ox_critical);
      ins.status(at, "phone2", "ph2_on");
      ins.status(at + 60, "oximeter", "ox_off");
      ins.status(at + 60, "phone2", "ph2_off");
      break;
    }
    case 3: {
      require_out_through(logs, 3, at, at + 120);
      ins.reading(at, "scale", sc_low);
      ins.reading(at, "oximeter", ox_low);
      ins.status(at, "fridge_door", "fd_open");
      ins.status(at + 90, "fridge_door", "fd_close");
      break;
    }
    case 4: {
      require(!presence_out_at(logs.presence, at), 4, "user must be at home");
      require_quiet(logs, 4, at - 180, at + 270);
      ins.status(at, "fridge_door", "fd_open");
      ins.reading(at, "oximeter", ox_low);
      ins.reading(at, "scale", sc_low);
      ins.status(at + 90, "fridge_door", "fd_close");
      break;
    }
    case 5: {
      require(!any_event_in(logs.behavior, at - tf, at + tf, "oximeter"), 5,
              "oximeter activity within the time frame");
      ins.status(at, "oximeter", "ox_off");
      break;
    }
    case 6: {
      require(!presence_out_at(logs.presence, at), 6, "user must be at home");
      require(!any_event_in(logs.behavior, at - tf, at + tf + 180, "scale") &&
                  !any_event_in(logs.behavior, at - tf, at + tf + 180,
                                "oximeter"),
              6, "vitals activity within the time frame");
      ins.reading(at, "scale", sc_outlier);
      ins.status(at, "phone2", "ph2_on");
      ins.status(at + 60, "scale", "sc_off");
      ins.status(at + 60, "phone2", "ph2_off");
      ins.reading(at + 120, "oximeter", ox_critical);
      ins.status(at + 120, "phone2", "ph2_on");
      ins.status(at + 180, "oximeter", "ox_off");
      ins.status(at + 180, "phone2", "ph2_off");
      break;
    }
    case 7: {
      require_out_through(logs, 7, at, at + 120);
      ins.status(at, "bedroom_door", "bd_open");
      ins.status(at + 60, "fridge_door", "fd_open");
      break;
    }
    case 8: {
      require(!presence_out_at(logs.presence, at), 8, "user must be at home");
      require_quiet(logs, 8, at - 300, at + 390);
      ins.status(at, "bedroom_door", "bd_open");
      ins.reading(at, "oximeter", ox_critical);
      ins.status(at + 90, "bedroom_door", "bd_open");
      ins.reading(at + 90, "oximeter", ox_critical);
      break;
    }
    default:
      break;
  }

  auto by_ts = [](const RawEvent& a, const RawEvent& b) { return a.ts < b.ts; };
  std::stable_sort(ins.logs.behavior.begin(), ins.logs.behavior.end(), by_ts);
  std::stable_sort(ins.logs.presence.begin(), ins.logs.presence.end(), by_ts);
  InjectionResult result;
  result.logs = std::move(ins.logs);
  result.label = LabelInterval{ins.lo, ins.hi, scenario_id};
  return result;
}

namespace {

bool overlaps_any(TimePoint lo, TimePoint hi,
                  std::span<const LabelInterval> intervals, Duration pad) {
  for (const auto& iv : intervals) {
    if (lo - pad <= iv.end && iv.start <= hi + pad) return true;
  }
  return false;
}

}  // namespace

TimePoint find_injection_time(const SimulatedLogs& logs,
                              const RoutineSpec& spec, int scenario_id,
                              std::uint64_t seed,
                              std::span<const LabelInterval> exclusions) {
  if (scenario_id < 1 || scenario_id > 8) {
    throw InvalidInputError("unknown scenario id " +
                            std::to_string(scenario_id));
  }
  Rng rng(derive_seed(seed, 100 + static_cast<std::uint64_t>(scenario_id)));
  std::vector<TimePoint> candidates;
  constexpr Duration kPad = 3600;  // keep scenarios an hour apart

  auto consider = [&](TimePoint at, Duration span) {
    if (logs.behavior.empty()) return;
    if (at < logs.behavior.front().ts || at + span > logs.behavior.back().ts) {
      return;
    }
    if (overlaps_any(at, at + span, exclusions, kPad)) return;
    try {
      inject_scenario(logs, spec, scenario_id, at, seed);  // precondition probe
    } catch (const InvalidInputError&) {
      return;
    }
    candidates.push_back(at);
  };

  switch (scenario_id) {
    case 1:
    case 3:
    case 7: {
      // Shortly after each departure, while the user is still out.
      const Duration offset =
          scenario_id == 1 ? 180 : (scenario_id == 3 ? 720 : 1500);
      for (const auto& rec : logs.presence) {
        if (rec.status == "ph1_out") consider(rec.ts + offset, 180);
      }
      break;
    }
    case 2:
    case 8: {
      // Night slots while the user is in bed.
      for (TimePoint day = logs.behavior.front().ts -
                           seconds_into_day(logs.behavior.front().ts);
           day < logs.behavior.back().ts; day += 86400) {
        for (Duration s = 2 * 3600; s <= 4 * 3600 + 1800; s += 600) {
          consider(day + s, 390);
        }
      }
      break;
    }
    case 5: {
      // Right after a fridge closing, inside that activity's segment.
      for (const auto& rec : logs.behavior) {
        if (rec.status == "fd_close") consider(rec.ts + 90, 60);
      }
      break;
    }
    case 4:
    case 6: {
      // Quiet at-home daytime slots.
      for (TimePoint day = logs.behavior.front().ts -
                           seconds_into_day(logs.behavior.front().ts);
           day < logs.behavior.back().ts; day += 86400) {
        for (Duration s = 11 * 3600; s <= 16 * 3600; s += 900) {
          consider(day + s, 400);
        }
      }
      break;
    }
    default:
      break;
  }
  if (candidates.empty()) {
    throw InvalidInputError("no eligible injection time for scenario " +
                            std::to_string(scenario_id));
  }
  return candidates[rng.below(candidates.size())];
}

MutationResult inject_all_scenarios(const SimulatedLogs& logs,
                                    const RoutineSpec& spec,
                                    std::uint64_t seed) {
  MutationResult result;
  result.logs = logs;
  for (int id = 1; id <= 8; ++id) {
    const TimePoint at =
        find_injection_time(result.logs, spec, id, seed, result.labels);
    auto injected = inject_scenario(result.logs, spec, id, at, seed);
    result.logs = std::move(injected.logs);
    result.labels.push_back(injected.label);
  }
  std::sort(result.labels.begin(), result.labels.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  return result;
}

MutationResult generate_random_anomalies(
    const SimulatedLogs& logs, const DeviceRegistry& registry,
    const std::map<DeviceKind, DeviceProfile>& profiles,
    const DetectorConfig& detector_cfg, Duration coalesce_window,
    Duration heartbeat_tolerance, Duration gap_threshold,
    std::size_t max_segment_len, std::size_t count, std::uint64_t seed,
    std::span<const LabelInterval> exclusions) {
  if (count == 0) throw InvalidInputError("count must be at least 1");

  // Rebuild the window view of the current logs.
  auto behavior_raw = filter_heartbeats(logs.behavior, heartbeat_tolerance);
  auto presence_raw = filter_heartbeats(logs.presence, heartbeat_tolerance);
  const auto behavior = resolve_events(behavior_raw, registry, profiles);
  const auto presence = resolve_events(presence_raw, registry, profiles);
  const auto timeline = merge_logs(behavior, presence, registry);
  const auto vectors = coalesce(timeline.events, coalesce_window);
  const auto segments = segment(vectors, gap_threshold, max_segment_len);

  struct Candidate {
    TimePoint lo, hi;  // raw-event span covered by the window
  };
  std::vector<Candidate> candidates;
  const auto oximeter_profile = profiles.find(DeviceKind::kOximeter);
  auto is_ox2_reading = [&](const RawEvent& rec) {
    return rec.reading.has_value() &&
           registry.kind_of(rec.device) == DeviceKind::kOximeter &&
           oximeter_profile != profiles.end() &&
           discretize(oximeter_profile->second, *rec.reading) == kOx2;
  };

  for (const auto& seg : segments) {
    for (const auto window : windows_of(seg, detector_cfg.window_len)) {
      const TimePoint lo = window.front().ts;
      const TimePoint hi = window.back().ts + coalesce_window;
      if (overlaps_any(lo, hi, exclusions, 0)) continue;
      bool flippable = false;
      for (const auto& rec : behavior_raw) {
        if (rec.ts < lo || rec.ts > hi) continue;
        if (rec.status == "ph2_on" || is_ox2_reading(rec)) {
          flippable = true;
          break;
        }
      }
      if (!flippable) {
        // ph1_in qualifies only when something follows it inside the
        // window; a trailing flipped ph1_out is indistinguishable from a
        // normal departure.
        for (const auto& rec : presence_raw) {
          if (rec.ts < lo || rec.ts > hi || rec.status != "ph1_in") continue;
          const bool has_follow =
              std::any_of(timeline.events.begin(), timeline.events.end(),
                          [&](const auto& e) {
                            return e.ts > rec.ts && e.ts <= hi;
                          });
          if (has_follow) {
            flippable = true;
            break;
          }
        }
      }
      if (flippable) candidates.push_back(Candidate{lo, hi});
    }
  }

  if (candidates.size() < count) {
    throw InvalidInputError(
        "requested " + std::to_string(count) +
        " random anomalies but only " + std::to_string(candidates.size()) +
        " candidate windows exist");
  }

  // Seeded selection of `count` distinct windows.
  Rng rng(derive_seed(seed, 0xa70));
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());

  MutationResult result;
  result.logs = logs;
  // Flips are idempotent, so records shared by overlapping chosen windows
  // are simply flipped once.
  for (std::size_t idx : order) {
    const auto& c = candidates[idx];
    for (auto& rec : result.logs.behavior) {
      if (rec.ts < c.lo || rec.ts > c.hi) continue;
      if (rec.status == "ph2_on") {
        rec.status = "ph2_off";
      } else if (is_ox2_reading(rec)) {
        rec.reading.reset();
        rec.status = "ox3";
      }
    }
    for (auto& rec : result.logs.presence) {
      if (rec.ts < c.lo || rec.ts > c.hi) continue;
      if (rec.status == "ph1_in") rec.status = "ph1_out";
    }
    result.labels.push_back(LabelInterval{c.lo, c.hi, 0});
  }
  std::sort(result.labels.begin(), result.labels.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.start, a.end) < std::tie(b.start, b.end);
            });
  return result;
}

}  // namespace rpmguard
