#include <algorithm>
#include <random>

#include <doctest.h>

#include "rpmguard/errors.hpp"
#include "rpmguard/events.hpp"
#include "rpmguard/hmm.hpp"

using namespace rpmguard;

namespace {

SensorEvent ev(const char* iso, const char* device, const char* symbol) {
  return SensorEvent{parse_iso8601(iso), device, symbol_code(symbol)};
}

RawEvent raw_status(const char* iso, const char* device, const char* status) {
  return RawEvent{parse_iso8601(iso), device, status, std::nullopt};
}

std::vector<int> codes(std::initializer_list<const char*> names) {
  std::vector<int> out;
  for (const char* n : names) out.push_back(symbol_code(n));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("merge + coalesce reproduce the sample log timeline") {
  const auto reg = default_registry();
  std::vector<SensorEvent> behavior{
      ev("2026-01-05T08:04:00Z", "oximeter", "ox1"),
      ev("2026-01-05T08:04:00Z", "phone2", "ph2_on"),
      ev("2026-01-05T08:06:00Z", "bedroom_door", "bd_open"),
      ev("2026-01-05T08:07:00Z", "bedroom_door", "bd_close"),
      ev("2026-01-05T08:24:00Z", "scale", "sc2"),
      ev("2026-01-05T08:24:00Z", "phone2", "ph2_on"),
      ev("2026-01-05T08:32:00Z", "fridge_door", "fd_open"),
      ev("2026-01-05T08:33:00Z", "fridge_door", "fd_close"),
  };
  std::vector<SensorEvent> presence{
      ev("2026-01-05T08:02:00Z", "phone1", "ph1_in"),
  };
  const auto timeline = merge_logs(behavior, presence, reg);
  CHECK(timeline.warnings.empty());
  REQUIRE(timeline.events.size() == 9);
  CHECK(timeline.events.front().device == "phone1");

  const auto vectors = coalesce(timeline.events, 30);
  REQUIRE(vectors.size() == 7);  // the seven timeline steps
  CHECK(vectors[0].symbols == codes({"ph1_in"}));
  CHECK(vectors[1].symbols == codes({"ox1", "ph2_on"}));
  CHECK(vectors[2].symbols == codes({"bd_open"}));
  CHECK(vectors[3].symbols == codes({"bd_close"}));
  CHECK(vectors[4].symbols == codes({"sc2", "ph2_on"}));
  CHECK(vectors[5].symbols == codes({"fd_open"}));
  CHECK(vectors[6].symbols == codes({"fd_close"}));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    CHECK(vectors[i].state_index == i);
  }
}

TEST_CASE("merge: ordering rules") {
  const auto reg = default_registry();
  CHECK(merge_logs({}, {}, reg).events.empty());

  // behavioral wins ties
  std::vector<SensorEvent> b{ev("2026-01-05T08:00:00Z", "oximeter", "ox1")};
  std::vector<SensorEvent> p{ev("2026-01-05T08:00:00Z", "phone1", "ph1_in")};
  const auto t = merge_logs(b, p, reg);
  CHECK(t.events[0].device == "oximeter");
  CHECK(t.events[1].device == "phone1");

  // shuffled input sorts to the same stream
  std::vector<SensorEvent> shuffled{
      ev("2026-01-05T09:00:00Z", "oximeter", "ox1"),
      ev("2026-01-05T08:00:00Z", "scale", "sc1"),
      ev("2026-01-05T10:00:00Z", "fridge_door", "fd_open"),
  };
  auto sorted = merge_logs(shuffled, {}, reg, /*clock_skew=*/86400);
  CHECK(sorted.warnings.empty());  // within the allowed skew
  CHECK(sorted.events[0].device == "scale");
  CHECK(sorted.events[2].device == "fridge_door");

  // beyond the skew: kept, corrected, warned
  auto warned = merge_logs(shuffled, {}, reg, 0);
  CHECK(warned.events.size() == 3);
  CHECK(warned.warnings.size() == 1);

  std::vector<SensorEvent> rogue{ev("2026-01-05T08:00:00Z", "toaster", "ox1")};
  CHECK_THROWS_AS(merge_logs(rogue, {}, reg), IngestionError);
}

TEST_CASE("filter_heartbeats: drops re-sends, keeps transitions") {
  std::vector<RawEvent> recs;
  for (int i = 0; i < 5; ++i) {  // 30-second heartbeat chain
    recs.push_back(raw_status("2026-01-05T08:00:00Z", "bedroom_door",
                              "bd_open"));
    recs.back().ts += i * 30;
  }
  recs.push_back(raw_status("2026-01-05T08:10:00Z", "bedroom_door",
                            "bd_open"));  // genuine re-activation
  recs.push_back(raw_status("2026-01-05T08:10:30Z", "bedroom_door",
                            "bd_close"));
  recs.push_back(RawEvent{parse_iso8601("2026-01-05T08:11:00Z"), "oximeter",
                          std::nullopt, 97.0});
  recs.push_back(RawEvent{parse_iso8601("2026-01-05T08:11:20Z"), "oximeter",
                          std::nullopt, 97.0});  // readings never filtered
  const auto kept = filter_heartbeats(recs, 45);
  REQUIRE(kept.size() == 5);
  CHECK(kept[0].ts == parse_iso8601("2026-01-05T08:00:00Z"));
  CHECK(kept[1].ts == parse_iso8601("2026-01-05T08:10:00Z"));
  CHECK(kept[3].reading.has_value());
  CHECK(kept[4].reading.has_value());
}

TEST_CASE("coalesce: grouping rules") {
  const auto reg = default_registry();
  std::vector<SensorEvent> events{
      ev("2026-01-05T08:04:00Z", "oximeter", "ox1"),
      ev("2026-01-05T08:04:10Z", "phone2", "ph2_on"),
  };
  auto vectors = coalesce(events, 30);
  REQUIRE(vectors.size() == 1);
  CHECK(vectors[0].symbols == codes({"ox1", "ph2_on"}));
  CHECK(vectors[0].ts == parse_iso8601("2026-01-05T08:04:00Z"));

  std::vector<SensorEvent> apart{
      ev("2026-01-05T08:04:00Z", "oximeter", "ox1"),
      ev("2026-01-05T08:09:00Z", "phone2", "ph2_on"),
  };
  CHECK(coalesce(apart, 30).size() == 2);

  // later event from the same device replaces the earlier one
  std::vector<SensorEvent> replaced{
      ev("2026-01-05T08:04:00Z", "oximeter", "ox1"),
      ev("2026-01-05T08:04:20Z", "oximeter", "ox_off"),
  };
  auto rv = coalesce(replaced, 30);
  REQUIRE(rv.size() == 1);
  CHECK(rv[0].symbols == codes({"ox_off"}));

  // Fig.5-style T6 grouping
  std::vector<SensorEvent> t6{
      ev("2026-01-05T13:00:00Z", "bedroom_door", "bd_open"),
      ev("2026-01-05T13:00:05Z", "oximeter", "ox3"),
      ev("2026-01-05T13:00:10Z", "scale", "sc2"),
      ev("2026-01-05T13:00:12Z", "phone2", "ph2_off"),
  };
  auto t6v = coalesce(t6, 30);
  REQUIRE(t6v.size() == 1);
  CHECK(t6v[0].symbols == codes({"bd_open", "ox3", "sc2", "ph2_off"}));
  CHECK(coalesce({}, 30).empty());
  (void)reg;
}

TEST_CASE("coalesce: idempotent and lossless") {
  std::mt19937_64 eng(31);
  const char* devices[] = {"bedroom_door", "fridge_door", "phone1", "phone2"};
  const char* symbols[] = {"bd_open", "fd_open", "ph1_in", "ph2_on"};
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<SensorEvent> events;
    TimePoint t = parse_iso8601("2026-01-05T00:00:00Z");
    const std::size_t count = 5 + eng() % 40;
    for (std::size_t i = 0; i < count; ++i) {
      t += static_cast<TimePoint>(eng() % 120);
      const std::size_t d = eng() % 4;
      events.push_back(SensorEvent{t, devices[d], symbol_code(symbols[d])});
    }
    const auto once = coalesce(events, 30);

    // lossless: every event's timestamp lands inside exactly one vector span
    for (const auto& e : events) {
      int owners = 0;
      for (const auto& v : once) {
        if (e.ts >= v.ts && e.ts - v.ts <= 30) ++owners;
      }
      CHECK(owners == 1);
    }

    // idempotence: re-coalescing the coalesced stream is a no-op
    std::vector<SensorEvent> flattened;
    for (const auto& v : once) {
      for (int code : v.symbols) {
        flattened.push_back(
            SensorEvent{v.ts, device_kind_name(owning_device(code)), code});
      }
    }
    const auto twice = coalesce(flattened, 30);
    REQUIRE(twice.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(twice[i].ts == once[i].ts);
      CHECK(twice[i].symbols == once[i].symbols);
    }
  }
}

TEST_CASE("segment: gap and length rules") {
  std::vector<ObservationVector> vectors;
  TimePoint t = parse_iso8601("2026-01-05T08:00:00Z");
  for (int i = 0; i < 10; ++i) {
    vectors.push_back(ObservationVector{static_cast<std::size_t>(i),
                                        t + i * 60, {kBdOpen}});
  }
  vectors[5].ts += 3 * 3600;  // 3-hour gap before vector 5
  for (int i = 6; i < 10; ++i) vectors[i].ts += 3 * 3600;
  auto segs = segment(vectors, 3600, 100);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].vectors.size() == 5);
  CHECK(segs[1].vectors.size() == 5);
  CHECK(segs[0].source_day == "2026-01-05");

  std::vector<ObservationVector> many;
  for (int i = 0; i < 25; ++i) {
    many.push_back(ObservationVector{static_cast<std::size_t>(i), t + i * 60,
                                     {kFdOpen}});
  }
  auto capped = segment(many, 3600, 20);
  REQUIRE(capped.size() == 2);
  CHECK(capped[0].vectors.size() == 20);
  CHECK(capped[1].vectors.size() == 5);

  CHECK(segment({}, 3600, 20).empty());
}

TEST_CASE("expand: worked examples") {
  auto vec = [](TimePoint ts, std::initializer_list<const char*> names) {
    ObservationVector v;
    v.ts = ts;
    for (const char* n : names) v.symbols.push_back(symbol_code(n));
    std::sort(v.symbols.begin(), v.symbols.end());
    return v;
  };

  // one bd_open step, then the three-way step
  std::vector<ObservationVector> t5t6{
      vec(0, {"bd_open"}), vec(60, {"ox3", "sc2", "ph2_off"})};
  const auto seqs = expand(t5t6);
  REQUIRE(seqs.size() == 3);
  // lexicographic by symbol code: sc2(6) < ox3(11) < ph2_off(13)
  CHECK(seqs[0] == ObservationSequence{kBdOpen, kSc2});
  CHECK(seqs[1] == ObservationSequence{kBdOpen, kOx3});
  CHECK(seqs[2] == ObservationSequence{kBdOpen, kPh2Off});

  // T1..T5: 2 x 2 x 1 x 1 x 1
  std::vector<ObservationVector> t1t5{
      vec(0, {"ox2", "ph2_on"}), vec(60, {"ox_off", "ph2_off"}),
      vec(120, {"bd_open"}), vec(180, {"bd_close"}), vec(240, {"bd_open"})};
  const auto seqs5 = expand(t1t5);
  REQUIRE(seqs5.size() == 4);
  const ObservationSequence devices_only{kOx2, kOxOff, kBdOpen, kBdClose,
                                         kBdOpen};
  CHECK(std::count(seqs5.begin(), seqs5.end(), devices_only) == 1);

  // singleton vectors expand to exactly the flat sequence
  std::vector<ObservationVector> flat{vec(0, {"fd_open"}),
                                      vec(60, {"fd_close"})};
  const auto one = expand(flat);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == ObservationSequence{kFdOpen, kFdClose});
}

TEST_CASE("expand: cardinality, cap, and errors") {
  std::mt19937_64 eng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ObservationVector> window;
    std::size_t product = 1;
    const std::size_t steps = 1 + eng() % 5;
    for (std::size_t tstep = 0; tstep < steps; ++tstep) {
      ObservationVector v;
      v.ts = static_cast<TimePoint>(tstep);
      const std::size_t k = 1 + eng() % 3;
      while (v.symbols.size() < k) {
        const int code = static_cast<int>(eng() % kAlphabetSize);
        if (std::find(v.symbols.begin(), v.symbols.end(), code) ==
            v.symbols.end()) {
          v.symbols.push_back(code);
        }
      }
      std::sort(v.symbols.begin(), v.symbols.end());
      product *= k;
      window.push_back(std::move(v));
    }
    CHECK(expand(window).size() == product);
  }

  // overflow names the offending window
  std::vector<ObservationVector> wide;
  for (int i = 0; i < 13; ++i) {
    wide.push_back(ObservationVector{static_cast<std::size_t>(i),
                                     parse_iso8601("2026-01-05T08:00:00Z") + i,
                                     {kOx1, kOx2, kOx3}});
  }
  CHECK_THROWS_WITH_AS(expand(wide, 4096),
                       doctest::Contains("2026-01-05T08:00:00Z"),
                       ExpansionOverflowError);
  CHECK_THROWS_AS(expand({}), InvalidInputError);
}

TEST_CASE("windows_of: sliding and short-segment windows") {
  SequenceSegment seg;
  for (int i = 0; i < 7; ++i) {
    seg.vectors.push_back(
        ObservationVector{static_cast<std::size_t>(i), i * 60, {kBdOpen}});
  }
  CHECK(windows_of(seg, 5).size() == 3);
  CHECK(windows_of(seg, 7).size() == 1);
  CHECK(windows_of(seg, 8).size() == 1);     // whole short segment
  CHECK(windows_of(seg, 8)[0].size() == 7);
  SequenceSegment empty;
  CHECK(windows_of(empty, 5).empty());
}
