#include <cmath>
#include <random>

#include <doctest.h>

#include "rpmguard/errors.hpp"
#include "rpmguard/hmm.hpp"
#include "test_support.hpp"

using namespace rpmguard;
using rpmguard::testing::brute_force_log_likelihood;
using rpmguard::testing::random_model;
using rpmguard::testing::random_sequence;

namespace {

HmmModel single_state_coin() {
  HmmModel m;
  m.n_states = 1;
  m.n_symbols = 2;
  m.transition = {1.0};
  m.emission = {0.5, 0.5};
  m.initial = {1.0};
  return m;
}

}  // namespace

TEST_CASE("forward: single-state model multiplies emissions") {
  const auto m = single_state_coin();
  CHECK(forward_log_likelihood(m, {0, 0, 0}) ==
        doctest::Approx(std::log(0.125)).epsilon(1e-12));
}

TEST_CASE("forward: equals brute-force path enumeration") {
  std::mt19937_64 eng(20260811);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + eng() % 4;
    const std::size_t msz = 2 + eng() % 5;
    const std::size_t len = 1 + eng() % 6;
    const auto model = random_model(eng, n, msz);
    const auto seq = random_sequence(eng, len, msz);
    const double fast = forward_log_likelihood(model, seq);
    const double slow = brute_force_log_likelihood(model, seq);
    REQUIRE(fast == doctest::Approx(slow).epsilon(0).scale(1).epsilon(1e-9));
  }
}

TEST_CASE("forward: two-state length-4 example against the oracle") {
  std::mt19937_64 eng(42);
  const auto model = random_model(eng, 2, 3);
  const ObservationSequence seq{0, 2, 1, 0};
  CHECK(std::abs(forward_log_likelihood(model, seq) -
                 brute_force_log_likelihood(model, seq)) < 1e-9);
}

TEST_CASE("forward: input validation") {
  const auto m = single_state_coin();
  CHECK_THROWS_AS(forward_log_likelihood(m, {}), InvalidInputError);
  CHECK_THROWS_AS(forward_log_likelihood(m, {0, 2}), AlphabetMismatchError);
  CHECK_THROWS_AS(forward_log_likelihood(m, {-1}), AlphabetMismatchError);
}

TEST_CASE("train: learns alternating structure") {
  std::vector<ObservationSequence> sequences(
      50, ObservationSequence{0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  TrainConfig cfg;
  const auto result = train_baum_welch(sequences, 2, 2, cfg);
  const double good =
      forward_log_likelihood(result.model, {0, 1, 0, 1});
  const double bad = forward_log_likelihood(result.model, {0, 0, 0, 0});
  CHECK(good > bad);
  CHECK(result.model.n_states == 2);
  result.model.validate();
}

TEST_CASE("train: log-likelihood trace is monotone and invariants hold") {
  std::mt19937_64 eng(7);
  std::vector<ObservationSequence> sequences;
  for (int i = 0; i < 12; ++i) {
    sequences.push_back(random_sequence(eng, 3 + eng() % 8, 5));
  }
  TrainConfig cfg;
  cfg.max_iterations = 40;
  std::size_t observed = 0;
  const auto result = train_baum_welch(
      sequences, 3, 5, cfg, [&](std::size_t, const HmmModel& m) {
        m.validate(1e-9);
        for (double p : m.emission) CHECK(p >= cfg.smoothing_floor);
        for (double p : m.transition) CHECK(p >= cfg.smoothing_floor);
        ++observed;
      });
  CHECK(observed == result.iterations);
  const auto& trace = result.log_likelihood_trace;
  REQUIRE(trace.size() == result.iterations + 1);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-8);
  }
}

TEST_CASE("train: identical seeds give bitwise-identical models") {
  std::mt19937_64 eng(99);
  std::vector<ObservationSequence> sequences;
  for (int i = 0; i < 8; ++i) {
    sequences.push_back(random_sequence(eng, 6, 4));
  }
  TrainConfig cfg;
  cfg.max_iterations = 25;
  cfg.rng_seed = 1234;
  const auto a = train_baum_welch(sequences, 3, 4, cfg);
  const auto b = train_baum_welch(sequences, 3, 4, cfg);
  CHECK(a.model.transition == b.model.transition);
  CHECK(a.model.emission == b.model.emission);
  CHECK(a.model.initial == b.model.initial);

  TrainConfig other = cfg;
  other.rng_seed = 4321;
  const auto c = train_baum_welch(sequences, 3, 4, other);
  CHECK(a.model.initial != c.model.initial);
}

TEST_CASE("train: input validation") {
  TrainConfig cfg;
  CHECK_THROWS_AS(train_baum_welch({}, 2, 4, cfg), InvalidInputError);
  CHECK_THROWS_AS(train_baum_welch({{0, 1}}, 0, 4, cfg), InvalidInputError);
  CHECK_THROWS_AS(train_baum_welch({{0, 4}}, 2, 4, cfg),
                  AlphabetMismatchError);
  CHECK_THROWS_AS(train_baum_welch({{}}, 2, 4, cfg), InvalidInputError);
  TrainConfig bad = cfg;
  bad.smoothing_floor = 0.5;  // >= 1/max(N, M)
  CHECK_THROWS_AS(train_baum_welch({{0, 1}}, 4, 4, bad), InvalidInputError);
}

TEST_CASE("serialize/deserialize: exact round-trip") {
  std::mt19937_64 eng(5);
  auto m = random_model(eng, 3, 6);
  m.alphabet_tag = "rpm16.v1";
  const auto text = serialize_model(m);
  const auto back = deserialize_model(text);
  CHECK(back.n_states == m.n_states);
  CHECK(back.n_symbols == m.n_symbols);
  CHECK(back.transition == m.transition);  // bitwise
  CHECK(back.emission == m.emission);
  CHECK(back.initial == m.initial);
  CHECK(back.alphabet_tag == m.alphabet_tag);
}

TEST_CASE("deserialize: rejects bad documents") {
  std::mt19937_64 eng(6);
  auto m = random_model(eng, 2, 3);
  m.alphabet_tag = "rpm16.v1";
  const auto text = serialize_model(m);

  CHECK_THROWS_AS(deserialize_model("not json"), ParseError);
  CHECK_THROWS_AS(deserialize_model("{}"), ParseError);

  // negative probability
  auto negative = text;
  const auto pos = negative.find("\"pi\"");
  REQUIRE(pos != std::string::npos);
  negative.replace(negative.find("0.", pos), 2, "-0.");
  CHECK_THROWS_AS(deserialize_model(negative), ParseError);

  // alphabet tag mismatch against the runtime alphabet
  CHECK_THROWS_AS(deserialize_model(text, "rpm16.v2"), ParseError);
  CHECK_NOTHROW(deserialize_model(text, "rpm16.v1"));

  // row-sum violation beyond 1e-6 (edit the document; serialize validates)
  std::string doc = text;
  const auto a_pos = doc.find("\"A\"");
  REQUIRE(a_pos != std::string::npos);
  doc.replace(doc.find("0.", a_pos), 2, "0.9999");
  CHECK_THROWS_AS(deserialize_model(doc), ParseError);

  // unknown field
  std::string extra = text;
  extra.insert(extra.rfind('}'), ", \"note\": 1");
  CHECK_THROWS_AS(deserialize_model(extra), ParseError);
}

TEST_CASE("model validation catches shape and sum errors") {
  auto m = single_state_coin();
  m.emission = {0.6, 0.6};
  CHECK_THROWS_AS(m.validate(), InvalidInputError);
  m = single_state_coin();
  m.initial = {0.5};
  CHECK_THROWS_AS(m.validate(), InvalidInputError);
  m = single_state_coin();
  m.transition = {1.0, 0.0};
  CHECK_THROWS_AS(m.validate(), InvalidInputError);
}
