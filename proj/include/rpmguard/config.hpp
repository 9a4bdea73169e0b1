#pragma once

#include <map>
#include <string>

#include "rpmguard/detector.hpp"
#include "rpmguard/discretizer.hpp"
#include "rpmguard/events.hpp"
#include "rpmguard/hmm.hpp"
#include "rpmguard/simulator.hpp"

namespace rpmguard {

// Coalescing / segmentation knobs shared by every stage.
struct PipelineParams {
  Duration coalesce_window = 30;      // seconds; sensor reporting cadence
  Duration heartbeat_tolerance = 45;  // seconds; periodic re-send suppression
  Duration gap_threshold = 2700;      // 45 min; starts a new segment
  std::size_t max_segment_len = 24;   // vectors per segment
  Duration clock_skew = 0;            // tolerated out-of-order seconds
};

// One configuration drives simulate/train/score/evaluate so the stages
// cannot disagree on the alphabet, profiles, or window geometry.
struct PipelineConfig {
  std::string alphabet_version = std::string(kAlphabetVersion);
  DeviceRegistry registry = default_registry();
  std::map<DeviceKind, DeviceProfile> profiles;  // optional inline profiles
  PipelineParams pipeline;
  std::size_t n_states = 12;
  TrainConfig train;
  DetectorConfig detector;
  RoutineSpec routine = default_routine();
  std::map<std::string, std::string> paths;  // optional artifact paths

  void validate() const;
  std::string to_json_text() const;

  // Parses a config document. Unknown fields and malformed values raise
  // ParseError naming the offending field and line.
  static PipelineConfig from_json_text(const std::string& text);
  static PipelineConfig load(const std::string& path);
};

}  // namespace rpmguard
