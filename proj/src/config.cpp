#include "rpmguard/config.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "rpmguard/errors.hpp"
#include "rpmguard/io.hpp"

namespace rpmguard {

namespace {

using nlohmann::json;

// Best-effort line lookup for semantic errors: first occurrence of the
// quoted key in the document.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + pos, '\n'));
}

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + byte, '\n'));
}

[[noreturn]] void field_error(const std::string& text, const std::string& key,
                              const std::string& what) {
  const auto line = line_of_key(text, key);
  throw ParseError("config field '" + key + "'" +
                   (line ? " (line " + std::to_string(line) + ")" : "") +
                   ": " + what);
}

void check_keys(const json& obj, std::initializer_list<const char*> known,
                const std::string& text, const std::string& scope) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return it.key() == k;
        }) == known.end()) {
      const std::string path =
          scope.empty() ? it.key() : scope + "." + it.key();
      field_error(text, it.key(), "unknown field '" + path + "'");
    }
  }
}

template <typename T>
T get_field(const json& obj, const char* key, T fallback,
            const std::string& text) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    field_error(text, key, e.what());
  }
}

DayFilter day_filter_from_string(const std::string& s, const std::string& text) {
  if (s == "all") return DayFilter::kAll;
  if (s == "weekday") return DayFilter::kWeekday;
  if (s == "weekend") return DayFilter::kWeekend;
  if (s == "workday") return DayFilter::kWorkday;
  if (s == "home") return DayFilter::kHomeday;
  field_error(text, "days",
              "expected all|weekday|weekend|workday|home, got '" + s + "'");
}

std::string day_filter_name(DayFilter f) {
  switch (f) {
    case DayFilter::kAll: return "all";
    case DayFilter::kWeekday: return "weekday";
    case DayFilter::kWeekend: return "weekend";
    case DayFilter::kWorkday: return "workday";
    default: return "home";
  }
}

int parse_minute_of_day(const std::string& hhmm, const std::string& text) {
  if (hhmm.size() != 5 || hhmm[2] != ':') {
    field_error(text, "time", "expected HH:MM, got '" + hhmm + "'");
  }
  const int h = (hhmm[0] - '0') * 10 + (hhmm[1] - '0');
  const int m = (hhmm[3] - '0') * 10 + (hhmm[4] - '0');
  if (h < 0 || h > 23 || m < 0 || m > 59) {
    field_error(text, "time", "expected HH:MM, got '" + hhmm + "'");
  }
  return h * 60 + m;
}

std::string minute_to_hhmm(int minute) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minute / 60, minute % 60);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  if (alphabet_version != kAlphabetVersion) {
    throw ParseError("config alphabet_version '" + alphabet_version +
                     "' does not match this build's alphabet '" +
                     std::string(kAlphabetVersion) + "'");
  }
  if (registry.devices.empty()) {
    throw ParseError("config device registry is empty");
  }
  detector.validate();
  routine.validate();
  std::set<std::string> seen;
  for (const auto& [name, path] : paths) {
    if (!seen.insert(path).second) {
      throw ParseError("config paths: '" + path +
                       "' referenced by more than one artifact");
    }
  }
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config parse error at line " +
                     std::to_string(line_of_offset(text, e.byte)) + ": " +
                     e.what());
  }
  if (!doc.is_object()) throw ParseError("config document is not an object");
  check_keys(doc,
             {"alphabet_version", "devices", "profiles", "pipeline", "train",
              "detector", "simulator", "paths"},
             text, "");

  PipelineConfig cfg;
  cfg.alphabet_version = get_field<std::string>(
      doc, "alphabet_version", std::string(kAlphabetVersion), text);

  if (doc.contains("devices")) {
    cfg.registry.devices.clear();
    for (const auto& [id, kind] : doc.at("devices").items()) {
      if (!kind.is_string()) field_error(text, id, "device kind must be a string");
      cfg.registry.devices[id] = device_kind_from_string(kind.get<std::string>());
    }
  }

  if (doc.contains("profiles")) {
    for (const auto& [name, p] : doc.at("profiles").items()) {
      if (!p.is_object()) field_error(text, name, "profile must be an object");
      check_keys(p, {"mu", "sigma"}, text, "profiles." + name);
      DeviceProfile profile;
      profile.kind = device_kind_from_string(name);
      if (!has_readings(profile.kind)) {
        field_error(text, name, "device kind has no reading bands");
      }
      profile.mu = get_field<double>(p, "mu", 0.0, text);
      profile.sigma = get_field<double>(p, "sigma", 0.0, text);
      if (!(profile.sigma > 0.0)) {
        field_error(text, name, "profile sigma must be positive");
      }
      cfg.profiles[profile.kind] = profile;
    }
  }

  if (doc.contains("pipeline")) {
    const auto& p = doc.at("pipeline");
    check_keys(p,
               {"coalesce_window_s", "heartbeat_tolerance_s",
                "gap_threshold_s", "max_segment_len", "clock_skew_s"},
               text, "pipeline");
    cfg.pipeline.coalesce_window =
        get_field<Duration>(p, "coalesce_window_s", 30, text);
    cfg.pipeline.heartbeat_tolerance =
        get_field<Duration>(p, "heartbeat_tolerance_s", 45, text);
    cfg.pipeline.gap_threshold =
        get_field<Duration>(p, "gap_threshold_s", 2700, text);
    cfg.pipeline.max_segment_len =
        get_field<std::size_t>(p, "max_segment_len", 24, text);
    cfg.pipeline.clock_skew = get_field<Duration>(p, "clock_skew_s", 0, text);
    if (cfg.pipeline.coalesce_window < 0 || cfg.pipeline.gap_threshold <= 0 ||
        cfg.pipeline.max_segment_len == 0) {
      field_error(text, "pipeline", "coalesce/gap/max_len out of range");
    }
  }

  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    check_keys(t,
               {"n_states", "max_iterations", "convergence_tol", "rng_seed",
                "smoothing_floor"},
               text, "train");
    cfg.n_states = get_field<std::size_t>(t, "n_states", 12, text);
    cfg.train.max_iterations =
        get_field<std::size_t>(t, "max_iterations", 200, text);
    cfg.train.convergence_tol =
        get_field<double>(t, "convergence_tol", 1e-4, text);
    cfg.train.rng_seed = get_field<std::uint64_t>(t, "rng_seed", 1, text);
    cfg.train.smoothing_floor =
        get_field<double>(t, "smoothing_floor", 1e-6, text);
    if (cfg.n_states == 0) field_error(text, "n_states", "must be positive");
    if (cfg.train.convergence_tol <= 0.0) {
      field_error(text, "convergence_tol", "must be positive");
    }
  }

  if (doc.contains("detector")) {
    const auto& d = doc.at("detector");
    check_keys(d, {"window_len", "threshold_margin", "expansion_cap"}, text,
               "detector");
    cfg.detector.window_len = get_field<std::size_t>(d, "window_len", 5, text);
    cfg.detector.threshold_margin =
        get_field<double>(d, "threshold_margin", 0.0, text);
    cfg.detector.expansion_cap =
        get_field<std::size_t>(d, "expansion_cap", 4096, text);
    try {
      cfg.detector.validate();
    } catch (const InvalidInputError& e) {
      field_error(text, "detector", e.what());
    }
  }

  if (doc.contains("simulator")) {
    const auto& s = doc.at("simulator");
    check_keys(s,
               {"start_date", "oximeter_mu", "oximeter_sigma", "scale_mu",
                "scale_sigma", "time_frame_s", "home_day_probability",
                "schedule"},
               text, "simulator");
    if (s.contains("start_date")) {
      cfg.routine.start_ts = parse_iso8601(
          get_field<std::string>(s, "start_date", "", text) + "T00:00:00Z");
    }
    cfg.routine.oximeter_mu = get_field<double>(s, "oximeter_mu", 97.0, text);
    cfg.routine.oximeter_sigma =
        get_field<double>(s, "oximeter_sigma", 1.15, text);
    cfg.routine.scale_mu = get_field<double>(s, "scale_mu", 80.0, text);
    cfg.routine.scale_sigma = get_field<double>(s, "scale_sigma", 1.0, text);
    cfg.routine.scenario_time_frame =
        get_field<Duration>(s, "time_frame_s", 600, text);
    cfg.routine.home_day_probability =
        get_field<double>(s, "home_day_probability", 0.40, text);
    if (s.contains("schedule")) {
      cfg.routine.schedule.clear();
      for (const auto& entry : s.at("schedule")) {
        check_keys(entry, {"kind", "time", "jitter_min", "days", "probability"},
                   text, "simulator.schedule");
        ScheduleEntry se;
        se.kind = get_field<std::string>(entry, "kind", "", text);
        se.start_minute = parse_minute_of_day(
            get_field<std::string>(entry, "time", "", text), text);
        se.jitter_min = get_field<double>(entry, "jitter_min", 5.0, text);
        se.days = day_filter_from_string(
            get_field<std::string>(entry, "days", "all", text), text);
        se.probability = get_field<double>(entry, "probability", 1.0, text);
        cfg.routine.schedule.push_back(std::move(se));
      }
    }
  }

  if (doc.contains("paths")) {
    for (const auto& [name, path] : doc.at("paths").items()) {
      if (!path.is_string()) field_error(text, name, "path must be a string");
      cfg.paths[name] = path.get<std::string>();
    }
  }

  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  return from_json_text(read_text_file(path));
}

std::string PipelineConfig::to_json_text() const {
  json doc;
  doc["alphabet_version"] = alphabet_version;
  json devices = json::object();
  for (const auto& [id, kind] : registry.devices) {
    devices[id] = device_kind_name(kind);
  }
  doc["devices"] = devices;
  if (!profiles.empty()) {
    json ps = json::object();
    for (const auto& [kind, p] : profiles) {
      ps[device_kind_name(kind)] = {{"mu", p.mu}, {"sigma", p.sigma}};
    }
    doc["profiles"] = ps;
  }
  doc["pipeline"] = {{"coalesce_window_s", pipeline.coalesce_window},
                     {"heartbeat_tolerance_s", pipeline.heartbeat_tolerance},
                     {"gap_threshold_s", pipeline.gap_threshold},
                     {"max_segment_len", pipeline.max_segment_len},
                     {"clock_skew_s", pipeline.clock_skew}};
  doc["train"] = {{"n_states", n_states},
                  {"max_iterations", train.max_iterations},
                  {"convergence_tol", train.convergence_tol},
                  {"rng_seed", train.rng_seed},
                  {"smoothing_floor", train.smoothing_floor}};
  doc["detector"] = {{"window_len", detector.window_len},
                     {"threshold_margin", detector.threshold_margin},
                     {"expansion_cap", detector.expansion_cap}};
  json schedule = json::array();
  for (const auto& entry : routine.schedule) {
    schedule.push_back({{"kind", entry.kind},
                        {"time", minute_to_hhmm(entry.start_minute)},
                        {"jitter_min", entry.jitter_min},
                        {"days", day_filter_name(entry.days)},
                        {"probability", entry.probability}});
  }
  doc["simulator"] = {{"start_date", utc_date(routine.start_ts)},
                      {"oximeter_mu", routine.oximeter_mu},
                      {"oximeter_sigma", routine.oximeter_sigma},
                      {"scale_mu", routine.scale_mu},
                      {"scale_sigma", routine.scale_sigma},
                      {"time_frame_s", routine.scenario_time_frame},
                      {"home_day_probability", routine.home_day_probability},
                      {"schedule", schedule}};
  if (!paths.empty()) {
    json ps = json::object();
    for (const auto& [name, path] : paths) ps[name] = path;
    doc["paths"] = ps;
  }
  return doc.dump(2) + "\n";
}

}  // namespace rpmguard
