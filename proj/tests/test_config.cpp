#include <doctest.h>

#include "rpmguard/config.hpp"
#include "rpmguard/errors.hpp"

using namespace rpmguard;

TEST_CASE("config: defaults round-trip through the document form") {
  const PipelineConfig defaults;
  const auto text = defaults.to_json_text();
  const auto parsed = PipelineConfig::from_json_text(text);
  CHECK(parsed.alphabet_version == kAlphabetVersion);
  CHECK(parsed.n_states == defaults.n_states);
  CHECK(parsed.train.smoothing_floor == defaults.train.smoothing_floor);
  CHECK(parsed.detector.window_len == defaults.detector.window_len);
  CHECK(parsed.pipeline.gap_threshold == defaults.pipeline.gap_threshold);
  CHECK(parsed.routine.schedule.size() == defaults.routine.schedule.size());
  CHECK(parsed.routine.oximeter_mu == defaults.routine.oximeter_mu);
  CHECK(parsed.registry.devices.size() == defaults.registry.devices.size());
}

TEST_CASE("config: partial documents fill in defaults") {
  const auto cfg = PipelineConfig::from_json_text(
      R"({"train": {"n_states": 4}, "detector": {"window_len": 3}})");
  CHECK(cfg.n_states == 4);
  CHECK(cfg.detector.window_len == 3);
  CHECK(cfg.train.max_iterations == 200);
  CHECK(cfg.pipeline.coalesce_window == 30);
}

TEST_CASE("config: unknown fields are named with their line") {
  const std::string text = R"({
  "train": {
    "n_states": 8,
    "trian_tol": 1
  }
})";
  CHECK_THROWS_WITH_AS(PipelineConfig::from_json_text(text),
                       doctest::Contains("trian_tol"), ParseError);
  CHECK_THROWS_WITH_AS(PipelineConfig::from_json_text(text),
                       doctest::Contains("line 4"), ParseError);
}

TEST_CASE("config: syntax errors carry a line number") {
  const std::string text = "{\n  \"train\": {\n  oops\n}\n}";
  CHECK_THROWS_WITH_AS(PipelineConfig::from_json_text(text),
                       doctest::Contains("line 3"), ParseError);
}

TEST_CASE("config: semantic validation") {
  CHECK_THROWS_AS(
      PipelineConfig::from_json_text(R"({"alphabet_version": "rpm16.v9"})"),
      ParseError);
  CHECK_THROWS_AS(
      PipelineConfig::from_json_text(R"({"detector": {"window_len": 1}})"),
      ParseError);
  CHECK_THROWS_AS(
      PipelineConfig::from_json_text(R"({"train": {"n_states": 0}})"),
      ParseError);
  CHECK_THROWS_AS(PipelineConfig::from_json_text(
                      R"({"profiles": {"oximeter": {"mu": 97, "sigma": 0}}})"),
                  ParseError);
  CHECK_THROWS_AS(PipelineConfig::from_json_text(
                      R"({"profiles": {"phone1": {"mu": 1, "sigma": 1}}})"),
                  ParseError);
  // two artifacts pointing at the same path
  CHECK_THROWS_AS(PipelineConfig::from_json_text(
                      R"({"paths": {"model": "out.json", "threshold": "out.json"}})"),
                  ParseError);
}

TEST_CASE("config: devices, profiles and schedule parse") {
  const auto cfg = PipelineConfig::from_json_text(R"({
    "devices": {"ox-1": "oximeter", "door": "bedroom_door"},
    "profiles": {"oximeter": {"mu": 97.0, "sigma": 1.15}},
    "simulator": {
      "start_date": "2026-03-02",
      "home_day_probability": 0.5,
      "schedule": [
        {"kind": "wake", "time": "06:45", "jitter_min": 2.0, "days": "workday"},
        {"kind": "vitals", "time": "08:00", "days": "all", "probability": 0.9}
      ]
    }
  })");
  CHECK(cfg.registry.devices.size() == 2);
  CHECK(cfg.registry.kind_of("ox-1") == DeviceKind::kOximeter);
  CHECK(cfg.profiles.at(DeviceKind::kOximeter).sigma == 1.15);
  REQUIRE(cfg.routine.schedule.size() == 2);
  CHECK(cfg.routine.schedule[0].start_minute == 6 * 60 + 45);
  CHECK(cfg.routine.schedule[0].days == DayFilter::kWorkday);
  CHECK(cfg.routine.schedule[1].probability == 0.9);
  CHECK(cfg.routine.home_day_probability == 0.5);
  CHECK(utc_date(cfg.routine.start_ts) == "2026-03-02");

  CHECK_THROWS_AS(PipelineConfig::from_json_text(
                      R"({"simulator": {"schedule": [{"kind": "wake", "time": "25:00"}]}})"),
                  ParseError);
  CHECK_THROWS_AS(PipelineConfig::from_json_text(
                      R"({"simulator": {"schedule": [{"kind": "wake", "time": "06:00", "days": "someday"}]}})"),
                  ParseError);
}
