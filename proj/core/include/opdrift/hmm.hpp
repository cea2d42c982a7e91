#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opdrift/matrix.hpp"

namespace opdrift::hmm {

using Sequence = std::span<const int>;

// Discrete-observation HMM lambda = (A, B, pi).
struct HmmModel {
  int n_states = 0;   // N
  int n_symbols = 0;  // M
  Matrix a;           // N x N transitions
  Matrix b;           // N x M emissions
  std::vector<double> pi;

  // Throws NumericError unless every row of a, b and pi is a distribution
  // (entries in [0,1], sums within `tol` of 1).
  void validate(double tol = 1e-9) const;

  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

struct HmmTrainConfig {
  int n_states = 2;
  int max_iters = 200;
  double tol = 1e-6;  // minimum total log-likelihood gain to keep iterating
  std::uint64_t seed = 0;
  int restarts = 1;  // independent initializations; the best final likelihood wins
  double prob_floor = 1e-10;

  void validate() const;
};

// Rows start at 1/dim, jittered by up to +-10% and renormalized.
// Deterministic in `seed`.
HmmModel init_model(int n_states, int n_symbols, std::uint64_t seed);

// Score of an observation sequence that no state path can produce.
inline constexpr double kImpossible = -std::numeric_limits<double>::infinity();
inline bool is_impossible(double log_likelihood) noexcept { return log_likelihood == kImpossible; }

// ln P(O | lambda) via the scaled forward pass. Returns kImpossible when some
// observation has zero probability under every reachable state.
double forward_log_likelihood(const HmmModel& model, Sequence seq);

// Log-likelihood per opcode: forward_log_likelihood / |seq|.
double llpo(const HmmModel& model, Sequence seq);

struct TrainResult {
  HmmModel model;
  // Total log-likelihood of the initial model followed by one entry per
  // re-estimation. Non-decreasing up to rounding.
  std::vector<double> trace;
  bool converged = false;
};

// Baum-Welch over several independent sequences: expected counts are summed
// per sequence, never across sequence boundaries. Sequences shorter than two
// symbols are rejected with InputError.
TrainResult baum_welch(std::span<const Sequence> seqs, int n_symbols, const HmmTrainConfig& config);

// Text persistence: "HMM N M", N rows of A, N rows of B, one row of pi.
std::string to_text(const HmmModel& model);
HmmModel from_text(std::string_view text);

}  // namespace opdrift::hmm
