#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rpmguard {

// A scalar observation sequence: symbol codes in [0, n_symbols).
using ObservationSequence = std::vector<int>;

/// Discrete-observation HMM: N hidden states, M symbols, row-stochastic
/// transition matrix A, emission matrix B, and initial distribution pi.
struct HmmModel {
  std::size_t n_states = 0;
  std::size_t n_symbols = 0;
  std::vector<double> transition;  // N x N, row-major; a(i,j) = P(j at t+1 | i at t)
  std::vector<double> emission;    // N x M, row-major; b(i,k) = P(symbol k | state i)
  std::vector<double> initial;     // N
  std::string alphabet_tag;        // alphabet the model was trained against

  double a(std::size_t i, std::size_t j) const {
    return transition[i * n_states + j];
  }
  double b(std::size_t i, std::size_t k) const {
    return emission[i * n_symbols + k];
  }
  double pi(std::size_t i) const { return initial[i]; }

  // Checks shapes, entry ranges [0, 1], and row sums within row_sum_tol.
  // Throws InvalidInputError describing the first violation.
  void validate(double row_sum_tol = 1e-9) const;
};

struct TrainConfig {
  std::size_t max_iterations = 200;
  double convergence_tol = 1e-4;     // stop when |delta total log-lik| < tol
  std::uint64_t rng_seed = 1;        // fully determines initialization
  double smoothing_floor = 1e-6;     // probability floor after each M-step
};

struct TrainResult {
  HmmModel model;
  // Total training log-likelihood of the model entering each iteration.
  std::vector<double> log_likelihood_trace;
  std::size_t iterations = 0;
  bool converged = false;
};

// Observes the model after each completed Baum-Welch iteration (used by
// invariant tests; pass nullptr to skip).
using IterationObserver =
    std::function<void(std::size_t iteration, const HmmModel&)>;

// log P(O | lambda) via the scaled forward recursion; exact marginalization
// over all hidden-state paths. Returns -inf when the sequence is impossible
// under the model. Throws InvalidInputError on an empty sequence and
// AlphabetMismatchError on a symbol code outside [0, n_symbols).
double forward_log_likelihood(const HmmModel& model,
                              const ObservationSequence& seq);

// Baum-Welch over multiple sequences: expected counts are accumulated across
// all sequences before normalizing. Initialization draws pi, A, B rows from
// seeded uniform randoms normalized to the simplex. After every M-step each
// row is floored at config.smoothing_floor and renormalized. Deterministic
// given (sequences, n_states, alphabet_size, config).
TrainResult train_baum_welch(const std::vector<ObservationSequence>& sequences,
                             std::size_t n_states, std::size_t alphabet_size,
                             const TrainConfig& config,
                             const IterationObserver& observer = nullptr);

// Versioned self-describing text document; round-trips every matrix entry
// exactly. deserialize_model throws ParseError for malformed documents,
// entry/row-sum violations (beyond 1e-6), or, when expected_alphabet_tag is
// non-empty, an alphabet tag mismatch.
std::string serialize_model(const HmmModel& model);
HmmModel deserialize_model(const std::string& text,
                           const std::string& expected_alphabet_tag = "");

}  // namespace rpmguard
