#include "opdrift/embeddings.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "opdrift/error.hpp"
#include "support/oracles.hpp"

namespace opdrift::embeddings {
namespace {

const std::vector<double> kVa{0.13537, 0.00364};
const std::vector<double> kVe{0.21176, 0.00223};
const std::vector<double> kVt{0.00158, 0.15238};

TEST(Cosine, ConsonantVowelValues) {
  EXPECT_NEAR(cosine_similarity(kVa, kVe), 0.9999, 5e-5);
  EXPECT_NEAR(cosine_similarity(kVa, kVt), 0.0372, 5e-5);
}

TEST(Cosine, IdentityScaleInvarianceAndRange) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(5), y(5);
    for (auto& v : x) v = u(rng) + 1e-3;
    for (auto& v : y) v = u(rng) + 1e-3;
    EXPECT_NEAR(cosine_similarity(x, x), 1.0, 1e-12);
    std::vector<double> scaled(x);
    for (auto& v : scaled) v *= 37.5;
    EXPECT_NEAR(cosine_similarity(scaled, y), cosine_similarity(x, y), 1e-12);
    const double s = cosine_similarity(x, y);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Cosine, ZeroVectorAndLengthMismatchThrow) {
  const std::vector<double> zero{0.0, 0.0};
  const std::vector<double> three{1.0, 2.0, 3.0};
  EXPECT_THROW(cosine_similarity(zero, kVa), InputError);
  EXPECT_THROW(cosine_similarity(kVa, three), InputError);
  EXPECT_THROW(normalize(zero), InputError);
}

TEST(Normalize, DotProductOfNormalizedEqualsCosine) {
  const auto a = normalize(kVa);
  const auto t = normalize(kVt);
  EXPECT_NEAR(std::hypot(a[0], a[1]), 1.0, 1e-15);
  EXPECT_NEAR(a[0] * t[0] + a[1] * t[1], cosine_similarity(kVa, kVt), 1e-15);
}

hmm::HmmModel model_from_b(const std::vector<std::vector<double>>& b) {
  const auto n = b.size();
  const auto m = b[0].size();
  hmm::HmmModel model{static_cast<int>(n), static_cast<int>(m), Matrix(n, n, 1.0 / static_cast<double>(n)), Matrix(n, m),
                      std::vector<double>(n, 1.0 / static_cast<double>(n))};
  for (std::size_t i = 0; i < n; ++i) std::copy(b[i].begin(), b[i].end(), model.b.row(i).begin());
  return model;
}

TEST(Hmm2Vec, EmbeddingsAreColumnsOfB) {
  // a, e, t columns of a two-state English model.
  const auto model = model_from_b({{0.13537, 0.21176, 0.00158, 0.65129}, {0.00364, 0.00223, 0.15238, 0.84175}});
  const auto set = hmm2vec(model);
  ASSERT_EQ(set.vocab_size, 4);
  ASSERT_EQ(set.dim, 2);
  EXPECT_EQ(std::vector<double>(set.vector(0).begin(), set.vector(0).end()), kVa);
  EXPECT_EQ(std::vector<double>(set.vector(2).begin(), set.vector(2).end()), kVt);
}

TEST(Hmm2Vec, SingleStateGivesScalars) {
  const auto set = hmm2vec(model_from_b({{0.2, 0.3, 0.5}}));
  EXPECT_EQ(set.dim, 1);
  EXPECT_DOUBLE_EQ(set.vector(1)[0], 0.3);
}

TEST(ConcatDistance, KnownValuesAndFlatOracle) {
  EmbeddingSet a{1, 1, Matrix(1, 1, 3.0)};
  EmbeddingSet b{1, 1, Matrix(1, 1, 7.0)};
  EXPECT_DOUBLE_EQ(concat_distance(a, b), 4.0);
  EXPECT_DOUBLE_EQ(concat_distance(a, a), 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  EmbeddingSet x{6, 3, Matrix(6, 3)}, y{6, 3, Matrix(6, 3)};
  for (auto& v : x.vectors.values()) v = g(rng);
  for (auto& v : y.vectors.values()) v = g(rng);
  double sum = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int d = 0; d < 3; ++d) {
      const double diff = x.vector(i)[static_cast<std::size_t>(d)] - y.vector(i)[static_cast<std::size_t>(d)];
      sum += diff * diff;
    }
  }
  EXPECT_NEAR(concat_distance(x, y), std::sqrt(sum), 1e-12);
  EXPECT_THROW(concat_distance(x, a), InputError);
}

hmm::HmmModel relabel(const hmm::HmmModel& m, const std::vector<int>& perm) {
  hmm::HmmModel out = m;
  for (int i = 0; i < m.n_states; ++i) {
    const auto pi = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
    out.pi[static_cast<std::size_t>(i)] = m.pi[pi];
    for (int j = 0; j < m.n_states; ++j) {
      out.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          m.a(pi, static_cast<std::size_t>(perm[static_cast<std::size_t>(j)]));
    }
    for (int k = 0; k < m.n_symbols; ++k) out.b(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) = m.b(pi, static_cast<std::size_t>(k));
  }
  return out;
}

TEST(Hmm2VecDistance, RelabeledCopyIsExactlyZero) {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 4; ++n) {
    const auto m = oracle::random_model(n, 7, rng);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    const auto r = relabel(m, perm);
    EXPECT_EQ(hmm2vec_distance(m, r), 0.0) << "N=" << n;
    EXPECT_EQ(hmm2vec_distance(m, m), 0.0);
  }
}

TEST(Hmm2VecDistance, TwoStateMatchesTwoOrderingOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m1 = oracle::random_model(2, 5, rng);
    const auto m2 = oracle::random_model(2, 5, rng);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      d1 += std::pow(m1.b(0, k) - m2.b(0, k), 2) + std::pow(m1.b(1, k) - m2.b(1, k), 2);
      d2 += std::pow(m1.b(0, k) - m2.b(1, k), 2) + std::pow(m1.b(1, k) - m2.b(0, k), 2);
    }
    EXPECT_NEAR(hmm2vec_distance(m1, m2), std::sqrt(std::min(d1, d2)), 1e-12);
  }
}

TEST(Hmm2VecDistance, ExactlySymmetric) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    const auto m1 = oracle::random_model(n, 6, rng);
    const auto m2 = oracle::random_model(n, 6, rng);
    EXPECT_EQ(hmm2vec_distance(m1, m2), hmm2vec_distance(m2, m1));
  }
}

TEST(Hmm2VecDistance, ShapeAndCapErrors) {
  std::mt19937_64 rng(1);
  const auto a = oracle::random_model(2, 4, rng);
  const auto b = oracle::random_model(3, 4, rng);
  const auto c = oracle::random_model(2, 5, rng);
  EXPECT_THROW(hmm2vec_distance(a, b), InputError);
  EXPECT_THROW(hmm2vec_distance(a, c), InputError);
  const auto big = oracle::random_model(4, 3, rng);
  EXPECT_THROW(hmm2vec_distance(big, big, 3), InputError);
}

// --- CBOW ---------------------------------------------------------------------

// Alphabetical eight-word vocabulary: for giant leap man mankind one small step.
const std::vector<std::string> kWords{"for", "giant", "leap", "man", "mankind", "one", "small", "step"};

int word(const std::string& w) {
  return static_cast<int>(std::find(kWords.begin(), kWords.end(), w) - kWords.begin());
}

std::string one_hot(int index) {
  std::string s(kWords.size(), '0');
  s[static_cast<std::size_t>(index)] = '1';
  return s;
}

TEST(TrainingPairs, OneHotEncodings) {
  EXPECT_EQ(one_hot(word("for")), "10000000");
  EXPECT_EQ(one_hot(word("man")), "00010000");
}

TEST(TrainingPairs, PhraseWithWindowTwoMatchesTable) {
  std::vector<int> phrase;
  for (const char* w : {"one", "small", "step", "for", "man", "one", "giant", "leap", "for", "mankind"}) {
    phrase.push_back(word(w));
  }
  const std::vector<std::pair<std::string, std::string>> table{
      {"one", "small"},   {"one", "step"},                                          //
      {"small", "one"},   {"small", "step"},  {"small", "for"},                     //
      {"step", "one"},    {"step", "small"},  {"step", "for"},   {"step", "man"},   //
      {"for", "small"},   {"for", "step"},    {"for", "man"},    {"for", "one"},    //
      {"man", "step"},    {"man", "for"},     {"man", "one"},    {"man", "giant"},  //
      {"one", "for"},     {"one", "man"},     {"one", "giant"},  {"one", "leap"},   //
      {"giant", "man"},   {"giant", "one"},   {"giant", "leap"}, {"giant", "for"},  //
      {"leap", "one"},    {"leap", "giant"},  {"leap", "for"},   {"leap", "mankind"},
      {"for", "giant"},   {"for", "leap"},    {"for", "mankind"},                   //
      {"mankind", "leap"}, {"mankind", "for"}};
  std::vector<TrainingPair> expected;
  for (const auto& [c, x] : table) expected.push_back({word(c), word(x)});

  auto got = training_pairs(phrase, 2);
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(got.size(), 34u);
  EXPECT_EQ(got, expected);
}

TEST(TrainingPairs, ShortSequencesAndBadWindow) {
  const std::vector<int> one{3};
  EXPECT_TRUE(training_pairs(one, 2).empty());
  const std::vector<int> two{1, 2};
  EXPECT_EQ(training_pairs(two, 5).size(), 2u);
  EXPECT_THROW(training_pairs(two, 0), InputError);
}

double max_relative_gradient_error(CbowNetwork& net, const std::vector<int>& context, int center) {
  Matrix gi, go;
  net.gradients(context, center, gi, go);
  double worst = 0.0;
  auto check = [&](Matrix& weights, const Matrix& analytic) {
    for (std::size_t r = 0; r < weights.rows(); ++r) {
      for (std::size_t c = 0; c < weights.cols(); ++c) {
        const double numeric =
            oracle::central_difference([&] { return net.loss(context, center); }, weights(r, c), 1e-5);
        worst = std::max(worst, oracle::relative_error(analytic(r, c), numeric, 1e-6));
      }
    }
  };
  check(net.input_weights(), gi);
  check(net.output_weights(), go);
  return worst;
}

TEST(Cbow, AnalyticGradientsMatchFiniteDifferences) {
  CbowNetwork net(5, 3, 17);
  // Move away from the tiny init so all gradient entries are well above noise.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : net.input_weights().values()) v = u(rng);
  for (auto& v : net.output_weights().values()) v = u(rng);
  EXPECT_LT(max_relative_gradient_error(net, {0, 1, 3, 4}, 2), 1e-6);
  EXPECT_LT(max_relative_gradient_error(net, {4}, 0), 1e-6);
  EXPECT_LT(max_relative_gradient_error(net, {1, 1, 2}, 1), 1e-6);
}

TEST(Cbow, InitIsSmallUniformAndSeeded) {
  const CbowNetwork a(10, 4, 1), b(10, 4, 1), c(10, 4, 2);
  EXPECT_EQ(a.output_weights(), b.output_weights());
  EXPECT_NE(a.output_weights(), c.output_weights());
  for (double v : a.input_weights().values()) EXPECT_LE(std::abs(v), 0.5 / 4);
  for (double v : a.output_weights().values()) EXPECT_LE(std::abs(v), 0.5 / 4);
}

TEST(Cbow, EmbeddingsAreOutputRows) {
  const CbowNetwork net(6, 2, 4);
  EXPECT_EQ(net.embeddings().vectors, net.output_weights());
}

TEST(Cbow, TrainStepReducesLoss) {
  CbowNetwork net(5, 2, 8);
  const std::vector<int> ctx{0, 1, 3};
  const double before = net.loss(ctx, 2);
  EXPECT_DOUBLE_EQ(net.train_step(ctx, 2, 0.5), before);
  EXPECT_LT(net.loss(ctx, 2), before);
}

TEST(Word2Vec, SwappedSymbolsEndUpAligned) {
  // Symbols 0 and 1 are interchangeable: every context seen around one is
  // seen equally often around the other.
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pick(1, 7);
  std::vector<std::vector<int>> corpus;
  for (int s = 0; s < 40; ++s) {
    std::vector<int> base;
    int prev = 1;
    for (int t = 0; t < 200; ++t) {
      // Order-one structure: each symbol tends to be followed by its successor.
      prev = (rng() % 3 == 0) ? pick(rng) : prev % 7 + 1;
      base.push_back(prev);
    }
    std::vector<int> swapped(base);
    for (auto& v : swapped) v = v == 1 ? 0 : v;
    corpus.push_back(base);
    corpus.push_back(swapped);
  }
  std::vector<hmm::Sequence> seqs(corpus.begin(), corpus.end());
  Word2VecConfig cfg;
  cfg.seed = 4;
  cfg.epochs = 10;
  const auto result = train_word2vec_cbow(seqs, 8, cfg);
  EXPECT_TRUE(result.unobserved.empty());
  EXPECT_GT(cosine_similarity(result.embeddings.vector(0), result.embeddings.vector(1)), 0.95);
}

TEST(Word2Vec, UnobservedSymbolKeepsInitialEmbedding) {
  const std::vector<int> seq{0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
  const std::vector<hmm::Sequence> seqs{seq};
  Word2VecConfig cfg;
  cfg.window = 2;
  cfg.seed = 6;
  const auto result = train_word2vec_cbow(seqs, 4, cfg);
  ASSERT_EQ(result.unobserved, std::vector<int>{3});
  const CbowNetwork fresh(4, cfg.dim, cfg.seed);
  EXPECT_EQ(result.embeddings.vectors(3, 0), fresh.output_weights()(3, 0));
  EXPECT_EQ(result.embeddings.vectors(3, 1), fresh.output_weights()(3, 1));
  EXPECT_NE(result.embeddings.vectors(0, 0), fresh.output_weights()(0, 0));
}

TEST(Word2Vec, DeterministicAndValidated) {
  const std::vector<int> seq{0, 1, 2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0};
  const std::vector<hmm::Sequence> seqs{seq};
  Word2VecConfig cfg;
  cfg.window = 2;
  cfg.seed = 3;
  EXPECT_EQ(train_word2vec_cbow(seqs, 4, cfg).embeddings, train_word2vec_cbow(seqs, 4, cfg).embeddings);

  cfg.window = 7;  // 13 tokens <= 2 * 7
  EXPECT_THROW(train_word2vec_cbow(seqs, 4, cfg), InsufficientDataError);
  EXPECT_THROW(train_word2vec_cbow({}, 4, Word2VecConfig{}), InputError);
  Word2VecConfig bad;
  bad.dim = 0;
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(EmbeddingText, RoundTrip) {
  EmbeddingSet set{3, 2, Matrix(3, 2)};
  set.vectors(0, 0) = 0.1;
  set.vectors(1, 1) = -1.0 / 3.0;
  set.vectors(2, 0) = 1e-300;
  EXPECT_EQ(embedding_from_text(to_text(set)), set);
  EXPECT_THROW(embedding_from_text("EMB 2 2\n1 2 3\n"), InputError);
  EXPECT_THROW(embedding_from_text("EMB 1 1\n1 2\n"), InputError);
}

}  // namespace
}  // namespace opdrift::embeddings
