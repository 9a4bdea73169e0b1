#include <cmath>
#include <random>

#include <doctest.h>

#include "rpmguard/detector.hpp"
#include "rpmguard/errors.hpp"
#include "test_support.hpp"

using namespace rpmguard;

namespace {

ObservationVector singleton(TimePoint ts, int code) {
  return ObservationVector{0, ts, {code}};
}

SequenceSegment segment_of(std::vector<int> codes, TimePoint start) {
  SequenceSegment seg;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    seg.vectors.push_back(singleton(start + static_cast<TimePoint>(i) * 60,
                                    codes[i]));
  }
  seg.start_ts = seg.vectors.front().ts;
  seg.end_ts = seg.vectors.back().ts;
  return seg;
}

// Single-state model whose per-symbol log costs are exactly the given
// values; a dummy symbol absorbs the leftover probability mass.
HmmModel cost_model(std::vector<double> costs) {
  HmmModel m;
  m.n_states = 1;
  m.n_symbols = costs.size() + 1;
  m.transition = {1.0};
  m.initial = {1.0};
  double used = 0.0;
  for (double c : costs) {
    m.emission.push_back(std::exp(c));
    used += m.emission.back();
  }
  m.emission.push_back(1.0 - used);
  return m;
}

}  // namespace

TEST_CASE("calibrate_threshold: minimum rule and margin arithmetic") {
  // window scores: 3 * -1.7 = -5.1, 3 * -3.1 = -9.3, 3 * (-13.9/3) = -13.9
  const auto model = cost_model({-1.7, -3.1, -13.9 / 3.0});
  std::vector<SequenceSegment> segments{
      segment_of({0, 0, 0}, 0),
      segment_of({1, 1, 1}, 10000),
      segment_of({2, 2, 2}, 20000),
  };
  DetectorConfig cfg;
  cfg.window_len = 3;
  const auto th = calibrate_threshold(model, segments, cfg);
  CHECK(th.cutoff == doctest::Approx(-13.9).epsilon(1e-9));
  CHECK(th.train_min == doctest::Approx(-13.9).epsilon(1e-9));
  CHECK(th.train_max == doctest::Approx(-5.1).epsilon(1e-9));
  CHECK(th.sequence_count == 3);
  CHECK(th.window_len == 3);

  DetectorConfig margin = cfg;
  margin.threshold_margin = 0.5;
  const auto th2 = calibrate_threshold(model, segments, margin);
  CHECK(th2.cutoff == doctest::Approx(-14.4).epsilon(1e-9));

  CHECK_THROWS_AS(calibrate_threshold(model, {}, cfg), CalibrationError);
}

TEST_CASE("score_window: one score per expanded sequence") {
  std::mt19937_64 eng(3);
  const auto model = testing::random_model(eng, 3, kAlphabetSize);
  DetectorConfig cfg;

  std::vector<ObservationVector> flat;
  for (int i = 0; i < 5; ++i) flat.push_back(singleton(i * 60, kBdOpen));
  const auto scores = score_window(model, flat, cfg);
  REQUIRE(scores.size() == 1);
  CHECK(scores[0].log_prob ==
        forward_log_likelihood(model,
                               {kBdOpen, kBdOpen, kBdOpen, kBdOpen, kBdOpen}));

  auto window = flat;
  window[2].symbols = {kOx3, kSc2, kPh2Off};
  CHECK(score_window(model, window, cfg).size() == 3);
}

TEST_CASE("score_window: never-seen symbol scores m*ln(floor)") {
  // symbols 0 and 1 are trained; symbol 2 exists in the alphabet but never
  // occurs, so every state's emission gets clamped at the smoothing floor
  std::mt19937_64 eng(8);
  std::vector<ObservationSequence> sequences;
  for (int i = 0; i < 20; ++i) {
    sequences.push_back(testing::random_sequence(eng, 6, 2));
  }
  TrainConfig tcfg;
  tcfg.max_iterations = 30;
  const auto trained = train_baum_welch(sequences, 2, 3, tcfg);

  DetectorConfig cfg;
  cfg.window_len = 4;
  std::vector<ObservationVector> window;
  for (int i = 0; i < 4; ++i) window.push_back(singleton(i * 60, 2));
  const auto scores = score_window(trained.model, window, cfg);
  REQUIRE(scores.size() == 1);
  // b(i, 2) == floor for every i, so the emission factors out each step
  CHECK(scores[0].log_prob ==
        doctest::Approx(4.0 * std::log(tcfg.smoothing_floor)).epsilon(1e-9));
}

TEST_CASE("detect_stream: window mechanics") {
  const auto model = cost_model({-1.0, -2.0, -9.0});
  DetectorConfig cfg;
  cfg.window_len = 3;
  Threshold th;
  th.cutoff = -8.0;
  th.train_min = -8.0;
  th.train_max = -3.0;
  th.window_len = 3;

  // stream shorter than m: no alerts plus a warning record
  std::vector<ObservationVector> tiny{singleton(0, 0), singleton(60, 0)};
  std::vector<std::string> warnings;
  CHECK(detect_stream(model, th, tiny, cfg, &warnings).empty());
  CHECK(warnings.size() == 1);

  // symbol 2 costs -9; one occurrence sinks its three covering windows
  std::vector<ObservationVector> stream;
  const std::vector<int> codes{0, 0, 0, 0, 2, 0, 0, 0};
  for (std::size_t i = 0; i < codes.size(); ++i) {
    stream.push_back(singleton(static_cast<TimePoint>(i) * 60, codes[i]));
  }
  std::vector<WindowRecord> records;
  const auto alerts = detect_stream(model, th, stream, cfg, nullptr, &records);
  CHECK(records.size() == codes.size() - cfg.window_len + 1);
  REQUIRE(alerts.size() == 3);
  for (const auto& alert : alerts) {
    CHECK(alert.log_prob < th.cutoff);
    CHECK(alert.sequence.size() == 3);
    CHECK(std::count(alert.sequence.begin(), alert.sequence.end(), 2) == 1);
  }
  // ordered by window end time
  CHECK(alerts[0].window_end < alerts[1].window_end);
  CHECK(alerts[1].window_end < alerts[2].window_end);

  // streaming equals scoring every window independently
  for (std::size_t i = 0; i + cfg.window_len <= stream.size(); ++i) {
    const auto scores = score_window(
        model, std::span(stream).subspan(i, cfg.window_len), cfg);
    double min_lp = scores[0].log_prob;
    for (const auto& s : scores) min_lp = std::min(min_lp, s.log_prob);
    CHECK(records[i].alerted == (min_lp < th.cutoff));
    CHECK(records[i].min_log_prob == doctest::Approx(min_lp));
  }
}

TEST_CASE("detect_stream: margin monotonicity") {
  std::mt19937_64 eng(12);
  const auto model = testing::random_model(eng, 2, 4);
  std::vector<ObservationVector> stream;
  for (int i = 0; i < 40; ++i) {
    stream.push_back(singleton(i * 60, static_cast<int>(eng() % 4)));
  }
  DetectorConfig cfg;
  cfg.window_len = 4;
  SequenceSegment seg;
  seg.vectors = stream;
  const std::vector<SequenceSegment> segments{seg};
  std::size_t previous = SIZE_MAX;
  for (double margin : {0.0, 0.5, 1.5, 4.0}) {
    DetectorConfig mcfg = cfg;
    mcfg.threshold_margin = margin;
    const auto th = calibrate_threshold(model, segments, mcfg);
    // score a noisier stream against this threshold
    std::mt19937_64 eng2(77);
    std::vector<ObservationVector> test;
    for (int i = 0; i < 60; ++i) {
      test.push_back(singleton(i * 60, static_cast<int>(eng2() % 4)));
    }
    const auto alerts = detect_stream(model, th, test, mcfg);
    CHECK(alerts.size() <= previous);
    previous = alerts.size();
  }
}

TEST_CASE("scan_segments: calibration consistency and short segments") {
  std::mt19937_64 eng(21);
  const auto model = testing::random_model(eng, 3, 6);
  std::vector<SequenceSegment> segments{
      segment_of({0, 1, 2, 3, 4, 5, 0, 1}, 0),
      segment_of({2, 2, 1}, 100000),  // shorter than the window
      segment_of({5, 4}, 200000),
  };
  DetectorConfig cfg;
  cfg.window_len = 5;
  const auto th = calibrate_threshold(model, segments, cfg);

  // with margin 0, no training window alerts (strictly-below rule)
  std::vector<WindowRecord> records;
  const auto alerts = scan_segments(model, th, segments, cfg, nullptr,
                                    &records);
  CHECK(alerts.empty());
  // every window was still scored: 4 sliding + 2 whole short segments
  CHECK(records.size() == 6);

  // an unseen-pattern short segment still raises an alert
  std::vector<SequenceSegment> weird{segment_of({5, 5}, 300000)};
  const auto weird_scores =
      score_window(model, weird[0].vectors, cfg);
  if (weird_scores[0].log_prob < th.cutoff) {
    CHECK(scan_segments(model, th, weird, cfg).size() == 1);
  }

  // alphabet / window-length mismatches are rejected
  Threshold other = th;
  other.alphabet_tag = "other";
  HmmModel tagged = model;
  tagged.alphabet_tag = "rpm16.v1";
  CHECK_THROWS_AS(scan_segments(tagged, other, segments, cfg),
                  InvalidInputError);
  Threshold wrong_len = th;
  wrong_len.window_len = 4;
  CHECK_THROWS_AS(scan_segments(model, wrong_len, segments, cfg),
                  InvalidInputError);
}

TEST_CASE("merge_alert_spans: consecutive overlapping windows collapse") {
  std::vector<AnomalyAlert> alerts{
      {0, 240, {0, 0, 0, 0, 0}, -20.0, -10.0},
      {60, 300, {0, 0, 0, 0, 1}, -25.0, -10.0},
      {120, 360, {0, 0, 0, 1, 0}, -18.0, -10.0},
      {10000, 10240, {1, 1, 1, 1, 1}, -15.0, -10.0},
  };
  const auto spans = merge_alert_spans(alerts);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].start == 0);
  CHECK(spans[0].end == 360);
  CHECK(spans[0].window_count == 3);
  CHECK(spans[0].min_log_prob == -25.0);
  CHECK(spans[0].worst_sequence == ObservationSequence{0, 0, 0, 0, 1});
  CHECK(spans[1].window_count == 1);
}

TEST_CASE("detect_stream: overflowing windows are flagged, not dropped") {
  std::mt19937_64 eng(33);
  const auto model = testing::random_model(eng, 2, kAlphabetSize);
  DetectorConfig cfg;
  cfg.window_len = 3;
  cfg.expansion_cap = 4;
  Threshold th;
  th.cutoff = -1000.0;
  th.train_min = -1000.0;
  th.train_max = -1.0;
  th.window_len = 3;

  std::vector<ObservationVector> stream;
  for (int i = 0; i < 5; ++i) {
    stream.push_back(singleton(i * 60, kBdOpen));
  }
  stream[2].symbols = {kOx1, kOx2, kOx3};  // 3 choices
  stream[3].symbols = {kSc1, kSc2};        // x2 = 6 > cap for two windows
  std::vector<std::string> warnings;
  std::vector<WindowRecord> records;
  const auto alerts =
      detect_stream(model, th, stream, cfg, &warnings, &records);
  CHECK(alerts.empty());
  // window [0..2] expands to 3 and fits; [1..3] and [2..4] expand to 6
  CHECK(records.size() == 1);
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[0].find("manual review") != std::string::npos);

  // score_window itself still reports the overflow as an error
  CHECK_THROWS_AS(score_window(model, std::span(stream).subspan(1, 3), cfg),
                  ExpansionOverflowError);
}

TEST_CASE("detector config validation") {
  DetectorConfig cfg;
  cfg.window_len = 1;
  CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
  cfg = DetectorConfig{};
  cfg.threshold_margin = -0.1;
  CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
  cfg = DetectorConfig{};
  cfg.expansion_cap = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
}
