#include "opdrift/hmm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "opdrift/error.hpp"
#include "support/oracles.hpp"

namespace opdrift::hmm {
namespace {

HmmModel two_state_model() {
  HmmModel m{2, 3, Matrix(2, 2), Matrix(2, 3), {0.6, 0.4}};
  m.a(0, 0) = 0.7; m.a(0, 1) = 0.3;
  m.a(1, 0) = 0.4; m.a(1, 1) = 0.6;
  m.b(0, 0) = 0.1; m.b(0, 1) = 0.4; m.b(0, 2) = 0.5;
  m.b(1, 0) = 0.7; m.b(1, 1) = 0.2; m.b(1, 2) = 0.1;
  return m;
}

TEST(HmmForward, MatchesHandComputedTwoStep) {
  const HmmModel m = two_state_model();
  const std::vector<int> obs{0, 2};
  // alpha_1 = (0.06, 0.28); alpha_2(j) = sum_i alpha_1(i) a_ij b_j(2)
  const double a0 = (0.06 * 0.7 + 0.28 * 0.4) * 0.5;
  const double a1 = (0.06 * 0.3 + 0.28 * 0.6) * 0.1;
  EXPECT_NEAR(forward_log_likelihood(m, obs), std::log(a0 + a1), 1e-14);
}

TEST(HmmForward, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const int m = 2 + trial % 3;
    const int t = 1 + trial % 7;
    const auto model = oracle::random_model(n, m, rng);
    const auto seq = oracle::random_sequence(t, m, rng);
    const double expected = std::log(oracle::brute_force_likelihood(model, seq));
    EXPECT_LE(oracle::relative_error(forward_log_likelihood(model, seq), expected), 1e-10) << "trial " << trial;
  }
}

TEST(HmmForward, ZeroProbabilitySymbolIsImpossible) {
  HmmModel m = two_state_model();
  m.b(0, 0) = 0.0; m.b(0, 1) = 0.5;
  m.b(1, 0) = 0.0; m.b(1, 1) = 0.9;
  const std::vector<int> obs{1, 0, 2};
  EXPECT_TRUE(is_impossible(forward_log_likelihood(m, obs)));
  EXPECT_TRUE(is_impossible(llpo(m, obs)));
}

TEST(HmmForward, LongSequenceStaysFinite) {
  const HmmModel m = two_state_model();
  std::vector<int> obs(100000);
  for (std::size_t i = 0; i < obs.size(); ++i) obs[i] = static_cast<int>(i % 3);
  const double ll = forward_log_likelihood(m, obs);
  EXPECT_TRUE(std::isfinite(ll));
  EXPECT_LT(ll, 0.0);
  EXPECT_NEAR(llpo(m, obs), ll / 100000.0, 1e-15);
}

TEST(HmmForward, RejectsOutOfRangeSymbolsAndEmptySequences) {
  const HmmModel m = two_state_model();
  const std::vector<int> bad{0, 3};
  const std::vector<int> empty;
  EXPECT_THROW(forward_log_likelihood(m, bad), InputError);
  EXPECT_THROW(forward_log_likelihood(m, empty), InputError);
}

TEST(HmmModel, ValidateRejectsNonStochasticRows) {
  HmmModel m = two_state_model();
  EXPECT_NO_THROW(m.validate());
  m.a(1, 1) = 0.7;
  EXPECT_THROW(m.validate(), NumericError);
}

TEST(HmmInit, RowStochasticAndSeedDeterministic) {
  const auto m1 = init_model(3, 5, 42);
  const auto m2 = init_model(3, 5, 42);
  const auto m3 = init_model(3, 5, 43);
  EXPECT_NO_THROW(m1.validate(1e-12));
  EXPECT_EQ(m1, m2);
  EXPECT_NE(m1, m3);
  // Jitter stays within +-10% of uniform before renormalization.
  for (double v : m1.b.values()) {
    EXPECT_GT(v, 0.9 / 5.0 / 1.1);
    EXPECT_LT(v, 1.1 / 5.0 / 0.9);
  }
}

TEST(HmmTrainConfig, RejectsOutOfRangeValues) {
  HmmTrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_states = 0;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.restarts = 0;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), InputError);
}

std::vector<std::vector<int>> sample_sequences(const HmmModel& truth, int count, int length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&](std::span<const double> p) {
    double r = u(rng);
    for (std::size_t i = 0; i < p.size(); ++i) {
      r -= p[i];
      if (r <= 0) return static_cast<int>(i);
    }
    return static_cast<int>(p.size() - 1);
  };
  std::vector<std::vector<int>> out;
  for (int s = 0; s < count; ++s) {
    std::vector<int> seq;
    int state = draw(truth.pi);
    for (int t = 0; t < length; ++t) {
      seq.push_back(draw(truth.b.row(static_cast<std::size_t>(state))));
      state = draw(truth.a.row(static_cast<std::size_t>(state)));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<Sequence> views(const std::vector<std::vector<int>>& seqs) {
  return {seqs.begin(), seqs.end()};
}

TEST(BaumWelch, TraceIsNonDecreasing) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto truth = oracle::random_model(2 + trial % 2, 4, rng);
    const auto data = sample_sequences(truth, 5, 60, 100 + static_cast<std::uint64_t>(trial));
    HmmTrainConfig cfg;
    cfg.n_states = truth.n_states;
    cfg.seed = static_cast<std::uint64_t>(trial);
    cfg.max_iters = 50;
    cfg.tol = 1e-300;
    const auto result = baum_welch(views(data), 4, cfg);
    ASSERT_GE(result.trace.size(), 2u);
    for (std::size_t i = 1; i < result.trace.size(); ++i) {
      EXPECT_GE(result.trace[i], result.trace[i - 1] - 1e-8) << "trial " << trial << " step " << i;
    }
  }
}

TEST(BaumWelch, TrainedModelIsStochasticAndImprovesLikelihood) {
  const auto truth = two_state_model();
  const auto data = sample_sequences(truth, 10, 200, 5);
  HmmTrainConfig cfg;
  cfg.seed = 3;
  const auto result = baum_welch(views(data), 3, cfg);
  EXPECT_NO_THROW(result.model.validate(1e-9));
  EXPECT_GT(result.trace.back(), result.trace.front());
  for (double v : result.model.b.values()) EXPECT_GE(v, 1e-10);
}

TEST(BaumWelch, TraceEndsWithModelLikelihood) {
  const auto data = sample_sequences(two_state_model(), 4, 80, 9);
  HmmTrainConfig cfg;
  cfg.seed = 1;
  const auto result = baum_welch(views(data), 3, cfg);
  double total = 0.0;
  for (const auto& s : data) total += forward_log_likelihood(result.model, s);
  EXPECT_NEAR(result.trace.back(), total, 1e-6 * std::abs(total));
}

TEST(BaumWelch, SequencesAreNotConcatenated) {
  // Two sequences that would create a 0->0 transition only if joined.
  const std::vector<std::vector<int>> data{{0, 1, 0, 1, 0}, {0, 1, 0, 1, 0}};
  const std::vector<int> joined{0, 1, 0, 1, 0, 0, 1, 0, 1, 0};
  HmmTrainConfig cfg;
  cfg.seed = 2;
  cfg.n_states = 2;
  const auto split = baum_welch(views(data), 2, cfg);
  const std::vector<Sequence> one{Sequence(joined)};
  const auto whole = baum_welch(one, 2, cfg);
  EXPECT_NE(split.model, whole.model);
}

TEST(BaumWelch, DeterministicForFixedSeed) {
  const auto data = sample_sequences(two_state_model(), 3, 100, 4);
  HmmTrainConfig cfg;
  cfg.seed = 99;
  cfg.restarts = 2;
  EXPECT_EQ(baum_welch(views(data), 3, cfg).model, baum_welch(views(data), 3, cfg).model);
}

TEST(BaumWelch, MoreRestartsNeverLowerLikelihood) {
  const auto data = sample_sequences(two_state_model(), 3, 100, 4);
  HmmTrainConfig one;
  one.seed = 5;
  HmmTrainConfig three = one;
  three.restarts = 3;
  EXPECT_GE(baum_welch(views(data), 3, three).trace.back(), baum_welch(views(data), 3, one).trace.back());
}

TEST(BaumWelch, RejectsShortSequencesAndBadSymbols) {
  const std::vector<std::vector<int>> short_seq{{0, 1, 2}, {1}};
  EXPECT_THROW(baum_welch(views(short_seq), 3, {}), InputError);
  const std::vector<std::vector<int>> bad_symbol{{0, 1, 5}};
  EXPECT_THROW(baum_welch(views(bad_symbol), 3, {}), InputError);
  EXPECT_THROW(baum_welch({}, 3, {}), InputError);
}

TEST(HmmText, RoundTripsExactly) {
  const auto data = sample_sequences(two_state_model(), 3, 50, 8);
  const auto model = baum_welch(views(data), 3, {}).model;
  const auto text = to_text(model);
  EXPECT_EQ(text.rfind("HMM 2 3\n", 0), 0u);
  EXPECT_EQ(from_text(text), model);
}

TEST(HmmText, RejectsMalformedInput) {
  EXPECT_THROW(from_text("HMM 2"), InputError);
  EXPECT_THROW(from_text("HMM 1 2\n1\n0.5 0.5\n"), InputError);
  EXPECT_THROW(from_text("NOPE 1 1\n1\n1\n1\n"), InputError);
  EXPECT_THROW(from_text("HMM 1 2\n1\n0.9 0.9\n1\n"), NumericError);
}

}  // namespace
}  // namespace opdrift::hmm
