#include "rpmguard/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rpmguard/errors.hpp"

namespace rpmguard {

namespace {

using nlohmann::json;

json parse_json_line(const std::string& line, std::size_t line_number,
                     const char* what) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + " line " +
                     std::to_string(line_number) + ": " + e.what());
  }
}

void reject_unknown_fields(const json& rec, std::span<const char* const> known,
                           std::size_t line_number, const char* what) {
  for (auto it = rec.begin(); it != rec.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ParseError(std::string(what) + " line " +
                       std::to_string(line_number) + ": unknown field '" +
                       it.key() + "'");
    }
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

RawEvent parse_event_record(const std::string& line,
                            std::size_t line_number) {
  const json rec = parse_json_line(line, line_number, "event log");
  if (!rec.is_object()) {
    throw ParseError("event log line " + std::to_string(line_number) +
                     ": record is not an object");
  }
  static constexpr const char* kKnown[] = {"ts", "device", "status",
                                           "reading"};
  reject_unknown_fields(rec, kKnown, line_number, "event log");
  if (!rec.contains("ts") || !rec.contains("device")) {
    throw ParseError("event log line " + std::to_string(line_number) +
                     ": missing 'ts' or 'device'");
  }
  RawEvent out;
  try {
    out.ts = parse_iso8601(rec["ts"].get<std::string>());
    out.device = rec["device"].get<std::string>();
    if (rec.contains("status")) out.status = rec["status"].get<std::string>();
    if (rec.contains("reading")) out.reading = rec["reading"].get<double>();
  } catch (const json::exception& e) {
    throw ParseError("event log line " + std::to_string(line_number) + ": " +
                     e.what());
  } catch (const ParseError& e) {
    throw ParseError("event log line " + std::to_string(line_number) + ": " +
                     e.what());
  }
  if (out.status.has_value() == out.reading.has_value()) {
    throw ParseError("event log line " + std::to_string(line_number) +
                     ": exactly one of 'status'/'reading' required");
  }
  return out;
}

std::vector<RawEvent> read_event_log(const std::string& path) {
  std::vector<RawEvent> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    out.push_back(parse_event_record(lines[i], i + 1));
  }
  return out;
}

std::string event_record_to_json(const RawEvent& rec) {
  json j;
  j["ts"] = format_iso8601(rec.ts);
  j["device"] = rec.device;
  if (rec.status) j["status"] = *rec.status;
  if (rec.reading) j["reading"] = *rec.reading;
  return j.dump();
}

void write_event_log(const std::string& path,
                     std::span<const RawEvent> records) {
  std::ostringstream out;
  for (const auto& rec : records) out << event_record_to_json(rec) << "\n";
  write_text_file(path, out.str());
}

std::vector<LabelInterval> read_labels(const std::string& path) {
  std::vector<LabelInterval> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const json rec = parse_json_line(lines[i], i + 1, "labels");
    static constexpr const char* kKnown[] = {"start", "end", "scenario"};
    reject_unknown_fields(rec, kKnown, i + 1, "labels");
    try {
      LabelInterval label;
      label.start = parse_iso8601(rec.at("start").get<std::string>());
      label.end = parse_iso8601(rec.at("end").get<std::string>());
      label.scenario = rec.at("scenario").get<int>();
      out.push_back(label);
    } catch (const json::exception& e) {
      throw ParseError("labels line " + std::to_string(i + 1) + ": " +
                       e.what());
    }
  }
  return out;
}

void write_labels(const std::string& path,
                  std::span<const LabelInterval> labels) {
  std::ostringstream out;
  for (const auto& label : labels) {
    json j;
    j["start"] = format_iso8601(label.start);
    j["end"] = format_iso8601(label.end);
    j["scenario"] = label.scenario;
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<AnomalyAlert> read_alerts(const std::string& path) {
  std::vector<AnomalyAlert> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const json rec = parse_json_line(lines[i], i + 1, "alerts");
    try {
      AnomalyAlert alert;
      alert.window_start =
          parse_iso8601(rec.at("window_start").get<std::string>());
      alert.window_end = parse_iso8601(rec.at("window_end").get<std::string>());
      alert.log_prob = rec.at("log_prob").get<double>();
      alert.cutoff = rec.at("threshold").get<double>();
      for (const auto& name : rec.at("sequence")) {
        alert.sequence.push_back(symbol_code(name.get<std::string>()));
      }
      out.push_back(std::move(alert));
    } catch (const json::exception& e) {
      throw ParseError("alerts line " + std::to_string(i + 1) + ": " +
                       e.what());
    }
  }
  return out;
}

void write_alerts(const std::string& path,
                  std::span<const AnomalyAlert> alerts) {
  std::ostringstream out;
  for (const auto& alert : alerts) {
    json j;
    j["window_start"] = format_iso8601(alert.window_start);
    j["window_end"] = format_iso8601(alert.window_end);
    j["log_prob"] = alert.log_prob;
    j["threshold"] = alert.cutoff;
    json seq = json::array();
    for (int code : alert.sequence) seq.push_back(symbol_name(code));
    j["sequence"] = seq;
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<WindowRecord> read_window_records(const std::string& path) {
  std::vector<WindowRecord> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const json rec = parse_json_line(lines[i], i + 1, "windows");
    try {
      WindowRecord w;
      w.start = parse_iso8601(rec.at("start").get<std::string>());
      w.end = parse_iso8601(rec.at("end").get<std::string>());
      w.min_log_prob = rec.at("min_log_prob").get<double>();
      w.alerted = rec.at("alerted").get<bool>();
      out.push_back(w);
    } catch (const json::exception& e) {
      throw ParseError("windows line " + std::to_string(i + 1) + ": " +
                       e.what());
    }
  }
  return out;
}

void write_window_records(const std::string& path,
                          std::span<const WindowRecord> records) {
  std::ostringstream out;
  for (const auto& w : records) {
    json j;
    j["start"] = format_iso8601(w.start);
    j["end"] = format_iso8601(w.end);
    j["min_log_prob"] = w.min_log_prob;
    j["alerted"] = w.alerted;
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

std::string serialize_threshold(const Threshold& threshold) {
  json doc;
  doc["format"] = "rpmguard.threshold.v1";
  doc["alphabet_tag"] = threshold.alphabet_tag;
  doc["cutoff"] = threshold.cutoff;
  doc["train_min"] = threshold.train_min;
  doc["train_max"] = threshold.train_max;
  doc["sequence_count"] = threshold.sequence_count;
  doc["window_len"] = threshold.window_len;
  return doc.dump(2) + "\n";
}

Threshold deserialize_threshold(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("threshold document: ") + e.what());
  }
  try {
    if (doc.at("format") != "rpmguard.threshold.v1") {
      throw ParseError("unsupported threshold format");
    }
    Threshold th;
    th.alphabet_tag = doc.at("alphabet_tag").get<std::string>();
    th.cutoff = doc.at("cutoff").get<double>();
    th.train_min = doc.at("train_min").get<double>();
    th.train_max = doc.at("train_max").get<double>();
    th.sequence_count = doc.at("sequence_count").get<std::size_t>();
    th.window_len = doc.at("window_len").get<std::size_t>();
    if (th.cutoff > th.train_max) {
      throw ParseError("threshold cutoff exceeds the maximum training "
                       "log-prob");
    }
    return th;
  } catch (const json::exception& e) {
    throw ParseError(std::string("threshold document: ") + e.what());
  }
}

std::string serialize_profiles(
    const std::map<DeviceKind, DeviceProfile>& profiles) {
  json doc;
  doc["format"] = "rpmguard.profiles.v1";
  json entries = json::object();
  for (const auto& [kind, profile] : profiles) {
    json p;
    p["mu"] = profile.mu;
    p["sigma"] = profile.sigma;
    p["bands"] = {{"upper", symbol_name(profile.upper_symbol())},
                  {"lower", symbol_name(profile.lower_symbol())},
                  {"outlier", symbol_name(profile.outlier_symbol())},
                  {"off", symbol_name(profile.off_symbol())}};
    entries[device_kind_name(kind)] = p;
  }
  doc["profiles"] = entries;
  return doc.dump(2) + "\n";
}

std::map<DeviceKind, DeviceProfile> deserialize_profiles(
    const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("profiles document: ") + e.what());
  }
  std::map<DeviceKind, DeviceProfile> out;
  try {
    if (doc.at("format") != "rpmguard.profiles.v1") {
      throw ParseError("unsupported profiles format");
    }
    for (const auto& [name, p] : doc.at("profiles").items()) {
      DeviceProfile profile;
      profile.kind = device_kind_from_string(name);
      if (!has_readings(profile.kind)) {
        throw ParseError("profile for '" + name +
                         "', which has no reading bands");
      }
      profile.mu = p.at("mu").get<double>();
      profile.sigma = p.at("sigma").get<double>();
      if (!(profile.sigma > 0.0)) {
        throw ParseError("profile '" + name + "' has non-positive sigma");
      }
      if (p.contains("bands")) {
        const auto& bands = p.at("bands");
        if (symbol_code(bands.at("upper").get<std::string>()) !=
                profile.upper_symbol() ||
            symbol_code(bands.at("lower").get<std::string>()) !=
                profile.lower_symbol() ||
            symbol_code(bands.at("outlier").get<std::string>()) !=
                profile.outlier_symbol() ||
            symbol_code(bands.at("off").get<std::string>()) !=
                profile.off_symbol()) {
          throw ParseError("profile '" + name +
                           "' band symbols do not match the device kind");
        }
      }
      out[profile.kind] = profile;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("profiles document: ") + e.what());
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("short write to '" + path + "'");
}

}  // namespace rpmguard
