#include "rpmguard/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "rpmguard/errors.hpp"
#include "rpmguard/rng.hpp"

namespace rpmguard {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_row(const std::vector<double>& v, std::size_t offset,
               std::size_t len, double tol, const char* what,
               std::size_t row) {
  double sum = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    const double x = v[offset + k];
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw InvalidInputError(std::string(what) + " row " +
                              std::to_string(row) + " has entry " +
                              std::to_string(x) + " outside [0, 1]");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw InvalidInputError(std::string(what) + " row " +
                            std::to_string(row) + " sums to " +
                            std::to_string(sum) + ", expected 1");
  }
}

// Floors every entry at `floor` and renormalizes to sum 1 while keeping the
// floored entries at exactly `floor`. Entries above the floor share the
// remaining mass proportionally; the loop re-floors anything the scaling
// pushed below.
void floor_and_normalize(double* row, std::size_t len, double floor) {
  double sum = 0.0;
  for (std::size_t k = 0; k < len; ++k) sum += row[k];
  if (sum <= 0.0) {
    const double u = 1.0 / static_cast<double>(len);
    for (std::size_t k = 0; k < len; ++k) row[k] = u;
    return;
  }
  for (std::size_t k = 0; k < len; ++k) row[k] /= sum;
  if (floor <= 0.0) return;
  // Each pass pins at least one more entry to the floor, so len passes
  // suffice; floor * len < 1 guarantees a free entry survives the scaling.
  std::vector<bool> at_floor(len, false);
  for (std::size_t pass = 0; pass <= len; ++pass) {
    std::size_t n_floor = 0;
    double free_sum = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      if (row[k] <= floor) at_floor[k] = true;
      if (at_floor[k]) {
        ++n_floor;
      } else {
        free_sum += row[k];
      }
    }
    const double target = 1.0 - static_cast<double>(n_floor) * floor;
    bool dirty = false;
    for (std::size_t k = 0; k < len; ++k) {
      if (at_floor[k]) {
        row[k] = floor;
      } else {
        row[k] *= target / free_sum;
        if (row[k] < floor) dirty = true;
      }
    }
    if (!dirty) return;
  }
}

struct SequenceStats {
  // Normalized forward/backward variables and per-step normalizers.
  std::vector<double> alpha;  // T x N
  std::vector<double> beta;   // T x N
  std::vector<double> norm;   // T
};

// One scaled forward pass; returns log P(O | model) or -inf. When `stats`
// is non-null, the normalized alphas and normalizers are stored for reuse.
double scaled_forward(const HmmModel& m, const ObservationSequence& seq,
                      SequenceStats* stats) {
  const std::size_t n = m.n_states;
  const std::size_t len = seq.size();
  std::vector<double> cur(n), next(n);
  double log_lik = 0.0;
  if (stats) {
    stats->alpha.assign(len * n, 0.0);
    stats->norm.assign(len, 0.0);
  }
  for (std::size_t t = 0; t < len; ++t) {
    const int sym = seq[t];
    double sum = 0.0;
    if (t == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = m.pi(i) * m.b(i, static_cast<std::size_t>(sym));
        sum += next[i];
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += cur[i] * m.a(i, j);
        next[j] = acc * m.b(j, static_cast<std::size_t>(sym));
        sum += next[j];
      }
    }
    if (sum <= 0.0) return kNegInf;
    log_lik += std::log(sum);
    for (std::size_t i = 0; i < n; ++i) next[i] /= sum;
    if (stats) {
      stats->norm[t] = sum;
      std::copy(next.begin(), next.end(), stats->alpha.begin() + t * n);
    }
    cur.swap(next);
  }
  return log_lik;
}

// Backward pass scaled by the forward normalizers, so that
// gamma_t(i) = alpha[t][i] * beta[t][i] without further normalization.
void scaled_backward(const HmmModel& m, const ObservationSequence& seq,
                     SequenceStats* stats) {
  const std::size_t n = m.n_states;
  const std::size_t len = seq.size();
  stats->beta.assign(len * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) stats->beta[(len - 1) * n + i] = 1.0;
  for (std::size_t t = len - 1; t-- > 0;) {
    const int sym = seq[t + 1];
    const double norm = stats->norm[t + 1];
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += m.a(i, j) * m.b(j, static_cast<std::size_t>(sym)) *
               stats->beta[(t + 1) * n + j];
      }
      stats->beta[t * n + i] = acc / norm;
    }
  }
}

void check_sequences(const std::vector<ObservationSequence>& sequences,
                     std::size_t alphabet_size) {
  if (sequences.empty()) {
    throw InvalidInputError("empty training set");
  }
  for (const auto& seq : sequences) {
    if (seq.empty()) {
      throw InvalidInputError("training sequence is empty");
    }
    for (int sym : seq) {
      if (sym < 0 || static_cast<std::size_t>(sym) >= alphabet_size) {
        throw AlphabetMismatchError(
            "symbol code " + std::to_string(sym) +
            " outside alphabet of size " + std::to_string(alphabet_size));
      }
    }
  }
}

HmmModel random_init(std::size_t n_states, std::size_t n_symbols,
                     std::uint64_t seed, double floor) {
  Rng rng(seed);
  HmmModel m;
  m.n_states = n_states;
  m.n_symbols = n_symbols;
  m.initial.resize(n_states);
  m.transition.resize(n_states * n_states);
  m.emission.resize(n_states * n_symbols);
  for (auto& x : m.initial) x = rng.uniform();
  floor_and_normalize(m.initial.data(), n_states, floor);
  for (std::size_t i = 0; i < n_states; ++i) {
    for (std::size_t j = 0; j < n_states; ++j) {
      m.transition[i * n_states + j] = rng.uniform();
    }
    floor_and_normalize(&m.transition[i * n_states], n_states, floor);
  }
  for (std::size_t i = 0; i < n_states; ++i) {
    for (std::size_t k = 0; k < n_symbols; ++k) {
      m.emission[i * n_symbols + k] = rng.uniform();
    }
    floor_and_normalize(&m.emission[i * n_symbols], n_symbols, floor);
  }
  return m;
}

}  // namespace

void HmmModel::validate(double row_sum_tol) const {
  if (n_states == 0) throw InvalidInputError("model has n_states = 0");
  if (n_symbols == 0) throw InvalidInputError("model has n_symbols = 0");
  if (initial.size() != n_states || transition.size() != n_states * n_states ||
      emission.size() != n_states * n_symbols) {
    throw InvalidInputError("model matrix shapes do not match N/M");
  }
  check_row(initial, 0, n_states, row_sum_tol, "pi", 0);
  for (std::size_t i = 0; i < n_states; ++i) {
    check_row(transition, i * n_states, n_states, row_sum_tol, "A", i);
    check_row(emission, i * n_symbols, n_symbols, row_sum_tol, "B", i);
  }
}

double forward_log_likelihood(const HmmModel& model,
                              const ObservationSequence& seq) {
  if (seq.empty()) {
    throw InvalidInputError("cannot score an empty observation sequence");
  }
  for (int sym : seq) {
    if (sym < 0 || static_cast<std::size_t>(sym) >= model.n_symbols) {
      throw AlphabetMismatchError("symbol code " + std::to_string(sym) +
                                  " outside alphabet of size " +
                                  std::to_string(model.n_symbols));
    }
  }
  return scaled_forward(model, seq, nullptr);
}

TrainResult train_baum_welch(const std::vector<ObservationSequence>& sequences,
                             std::size_t n_states, std::size_t alphabet_size,
                             const TrainConfig& config,
                             const IterationObserver& observer) {
  if (n_states == 0) throw InvalidInputError("n_states must be positive");
  if (alphabet_size == 0) {
    throw InvalidInputError("alphabet_size must be positive");
  }
  check_sequences(sequences, alphabet_size);
  if (config.convergence_tol <= 0.0) {
    throw InvalidInputError("convergence_tol must be positive");
  }
  if (config.max_iterations == 0) {
    throw InvalidInputError("max_iterations must be positive");
  }
  if (config.smoothing_floor < 0.0 ||
      config.smoothing_floor *
              static_cast<double>(std::max(n_states, alphabet_size)) >=
          1.0) {
    throw InvalidInputError("smoothing_floor must lie in [0, 1/max(N, M))");
  }

  TrainResult result;
  result.model =
      random_init(n_states, alphabet_size, config.rng_seed,
                  config.smoothing_floor);
  HmmModel& m = result.model;

  const std::size_t n = n_states;
  const std::size_t msz = alphabet_size;
  std::vector<double> pi_acc(n), a_num(n * n), a_den(n), b_num(n * msz),
      b_den(n);
  SequenceStats stats;

  // E pass: accumulates expected counts and returns the total log-likelihood
  // of the current model.
  auto e_step = [&]() {
    std::fill(pi_acc.begin(), pi_acc.end(), 0.0);
    std::fill(a_num.begin(), a_num.end(), 0.0);
    std::fill(a_den.begin(), a_den.end(), 0.0);
    std::fill(b_num.begin(), b_num.end(), 0.0);
    std::fill(b_den.begin(), b_den.end(), 0.0);
    double total = 0.0;
    for (const auto& seq : sequences) {
      const double ll = scaled_forward(m, seq, &stats);
      if (!std::isfinite(ll)) {
        throw Error(
            "training sequence has zero likelihood under the current model; "
            "use a positive smoothing_floor");
      }
      total += ll;
      scaled_backward(m, seq, &stats);
      const std::size_t len = seq.size();
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t sym = static_cast<std::size_t>(seq[t]);
        for (std::size_t i = 0; i < n; ++i) {
          const double g = stats.alpha[t * n + i] * stats.beta[t * n + i];
          if (t == 0) pi_acc[i] += g;
          b_num[i * msz + sym] += g;
          b_den[i] += g;
          if (t + 1 < len) a_den[i] += g;
        }
      }
      for (std::size_t t = 0; t + 1 < len; ++t) {
        const std::size_t sym = static_cast<std::size_t>(seq[t + 1]);
        const double norm = stats.norm[t + 1];
        for (std::size_t i = 0; i < n; ++i) {
          const double ai = stats.alpha[t * n + i];
          if (ai == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) {
            a_num[i * n + j] += ai * m.a(i, j) * m.b(j, sym) *
                                stats.beta[(t + 1) * n + j] / norm;
          }
        }
      }
    }
    return total;
  };

  auto m_step = [&]() {
    const double k = static_cast<double>(sequences.size());
    for (std::size_t i = 0; i < n; ++i) m.initial[i] = pi_acc[i] / k;
    floor_and_normalize(m.initial.data(), n, config.smoothing_floor);
    for (std::size_t i = 0; i < n; ++i) {
      // States with no expected mass keep their previous row.
      if (a_den[i] > 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
          m.transition[i * n + j] = a_num[i * n + j] / a_den[i];
        }
      }
      floor_and_normalize(&m.transition[i * n], n, config.smoothing_floor);
      if (b_den[i] > 0.0) {
        for (std::size_t sym = 0; sym < msz; ++sym) {
          m.emission[i * msz + sym] = b_num[i * msz + sym] / b_den[i];
        }
      }
      floor_and_normalize(&m.emission[i * msz], msz, config.smoothing_floor);
    }
  };

  result.log_likelihood_trace.push_back(e_step());
  while (result.iterations < config.max_iterations) {
    m_step();
    ++result.iterations;
    if (observer) observer(result.iterations, m);
    result.log_likelihood_trace.push_back(e_step());
    const auto& trace = result.log_likelihood_trace;
    if (std::abs(trace[trace.size() - 1] - trace[trace.size() - 2]) <
        config.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::string serialize_model(const HmmModel& model) {
  model.validate();
  nlohmann::json doc;
  doc["format"] = "rpmguard.hmm.v1";
  doc["alphabet_tag"] = model.alphabet_tag;
  doc["n_states"] = model.n_states;
  doc["n_symbols"] = model.n_symbols;
  doc["pi"] = model.initial;
  doc["A"] = model.transition;
  doc["B"] = model.emission;
  return doc.dump(2) + "\n";
}

HmmModel deserialize_model(const std::string& text,
                           const std::string& expected_alphabet_tag) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model document is not an object");
  static const char* const kFields[] = {"format", "alphabet_tag", "n_states",
                                        "n_symbols", "pi", "A", "B"};
  for (const char* f : kFields) {
    if (!doc.contains(f)) {
      throw ParseError(std::string("model document missing field '") + f +
                       "'");
    }
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find_if(std::begin(kFields), std::end(kFields), [&](auto* f) {
          return it.key() == f;
        }) == std::end(kFields)) {
      throw ParseError("model document has unknown field '" + it.key() + "'");
    }
  }
  if (doc["format"] != "rpmguard.hmm.v1") {
    throw ParseError("unsupported model format '" +
                     doc["format"].get<std::string>() + "'");
  }
  HmmModel m;
  try {
    m.alphabet_tag = doc["alphabet_tag"].get<std::string>();
    m.n_states = doc["n_states"].get<std::size_t>();
    m.n_symbols = doc["n_symbols"].get<std::size_t>();
    m.initial = doc["pi"].get<std::vector<double>>();
    m.transition = doc["A"].get<std::vector<double>>();
    m.emission = doc["B"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  if (!expected_alphabet_tag.empty() &&
      m.alphabet_tag != expected_alphabet_tag) {
    throw ParseError("model alphabet tag '" + m.alphabet_tag +
                     "' does not match runtime alphabet '" +
                     expected_alphabet_tag + "'");
  }
  try {
    m.validate(1e-6);
  } catch (const InvalidInputError& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  return m;
}

}  // namespace rpmguard
