#include "opdrift/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "opdrift/error.hpp"
#include "opdrift/random.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::embeddings {

namespace {

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

}  // namespace

void EmbeddingSet::validate() const {
  if (vocab_size < 1 || dim < 1) throw InputError("embedding set dimensions must be positive");
  if (vectors.rows() != static_cast<std::size_t>(vocab_size) || vectors.cols() != static_cast<std::size_t>(dim)) {
    throw InputError("embedding matrix shape disagrees with vocab_size x dim");
  }
  for (double v : vectors.values()) {
    if (!std::isfinite(v)) throw NumericError("embedding contains a non-finite entry");
  }
}

EmbeddingSet hmm2vec(const hmm::HmmModel& model) {
  const auto n = static_cast<std::size_t>(model.n_states);
  const auto m = static_cast<std::size_t>(model.n_symbols);
  EmbeddingSet out{model.n_symbols, model.n_states, Matrix(m, n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) out.vectors(k, i) = model.b(i, k);
  }
  return out;
}

double cosine_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("cosine_similarity: length mismatch");
  const double nx = squared_norm(x);
  const double ny = squared_norm(y);
  if (nx == 0.0 || ny == 0.0) throw InputError("cosine_similarity: zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
}

std::vector<double> normalize(std::span<const double> x) {
  const double n = std::sqrt(squared_norm(x));
  if (n == 0.0) throw InputError("normalize: zero vector");
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v /= n;
  return out;
}

double concat_distance(const EmbeddingSet& lhs, const EmbeddingSet& rhs) {
  if (lhs.vocab_size != rhs.vocab_size || lhs.dim != rhs.dim) {
    throw InputError("concat_distance: embedding sets have different shapes");
  }
  return std::sqrt(squared_distance(lhs.vectors.values(), rhs.vectors.values()));
}

double hmm2vec_distance(const hmm::HmmModel& lhs, const hmm::HmmModel& rhs, int max_states) {
  if (lhs.n_states != rhs.n_states || lhs.n_symbols != rhs.n_symbols) {
    throw InputError("hmm2vec_distance: models differ in N or M");
  }
  if (lhs.n_states > max_states) {
    throw InputError("hmm2vec_distance: N=" + std::to_string(lhs.n_states) +
                     " exceeds the exhaustive permutation limit of " + std::to_string(max_states) +
                     "; an assignment-based approximation would be needed");
  }
  const auto n = static_cast<std::size_t>(lhs.n_states);

  // pair[i][j] = |lhs.B_i - rhs.B_j|^2. Each permutation's total is summed in
  // sorted order, so swapping the arguments (which maps every permutation to
  // its inverse over the same multiset of terms) reproduces the result bit for bit.
  Matrix pair(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) pair(i, j) = squared_distance(lhs.b.row(i), rhs.b.row(j));
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> terms(n);
  double best = std::numeric_limits<double>::infinity();
  do {
    for (std::size_t i = 0; i < n; ++i) terms[i] = pair(i, perm[i]);
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) total += t;
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

// --- CBOW ------------------------------------------------------------------------

void Word2VecConfig::validate() const {
  if (dim < 1) throw InputError("word2vec dim must be >= 1");
  if (window < 1) throw InputError("word2vec window must be >= 1");
  if (epochs < 1) throw InputError("word2vec epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InputError("word2vec learning_rate must be > 0");
  if (!(min_learning_rate >= 0.0 && min_learning_rate <= learning_rate)) {
    throw InputError("word2vec min_learning_rate must lie in [0, learning_rate]");
  }
}

std::vector<TrainingPair> training_pairs(hmm::Sequence seq, int window) {
  if (window < 1) throw InputError("training_pairs: window must be >= 1");
  std::vector<TrainingPair> pairs;
  const auto t_len = static_cast<std::ptrdiff_t>(seq.size());
  for (std::ptrdiff_t t = 0; t < t_len; ++t) {
    const auto lo = std::max<std::ptrdiff_t>(0, t - window);
    const auto hi = std::min<std::ptrdiff_t>(t_len - 1, t + window);
    for (auto c = lo; c <= hi; ++c) {
      if (c != t) pairs.push_back({seq[static_cast<std::size_t>(t)], seq[static_cast<std::size_t>(c)]});
    }
  }
  return pairs;
}

CbowNetwork::CbowNetwork(int vocab_size, int dim, std::uint64_t seed)
    : vocab_size_(vocab_size),
      dim_(dim),
      input_(static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(dim)),
      output_(static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(dim)),
      active_(static_cast<std::size_t>(vocab_size), true) {
  if (vocab_size < 1 || dim < 1) throw InputError("CbowNetwork: vocab_size and dim must be >= 1");
  Rng rng(seed);
  const double r = 0.5 / dim;
  std::uniform_real_distribution<double> init(-r, r);
  for (double& w : input_.values()) w = init(rng);
  for (double& w : output_.values()) w = init(rng);
}

void CbowNetwork::set_active(std::vector<bool> active) {
  if (active.size() != static_cast<std::size_t>(vocab_size_)) throw InputError("CBOW: active mask has wrong size");
  active_ = std::move(active);
}

void CbowNetwork::forward(std::span<const int> context, std::vector<double>& hidden,
                          std::vector<double>& probs) const {
  if (context.empty()) throw InputError("CBOW: empty context");
  const auto d = static_cast<std::size_t>(dim_);
  const auto m = static_cast<std::size_t>(vocab_size_);
  hidden.assign(d, 0.0);
  for (int c : context) {
    auto row = input_.row(static_cast<std::size_t>(c));
    for (std::size_t k = 0; k < d; ++k) hidden[k] += row[k];
  }
  const double inv = 1.0 / static_cast<double>(context.size());
  for (double& h : hidden) h *= inv;

  probs.resize(m);
  double max_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    if (!active_[j]) continue;
    auto row = output_.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += row[k] * hidden[k];
    probs[j] = s;
    max_score = std::max(max_score, s);
  }
  double z = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    probs[j] = active_[j] ? std::exp(probs[j] - max_score) : 0.0;
    z += probs[j];
  }
  for (double& p : probs) p /= z;
}

double CbowNetwork::loss(std::span<const int> context, int center) const {
  std::vector<double> hidden, probs;
  forward(context, hidden, probs);
  return -std::log(probs[static_cast<std::size_t>(center)]);
}

void CbowNetwork::gradients(std::span<const int> context, int center, Matrix& grad_input,
                            Matrix& grad_output) const {
  std::vector<double> hidden, probs;
  forward(context, hidden, probs);
  const auto d = static_cast<std::size_t>(dim_);
  const auto m = static_cast<std::size_t>(vocab_size_);
  grad_input = Matrix(m, d);
  grad_output = Matrix(m, d);
  std::vector<double> hidden_grad(d, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (!active_[j]) continue;
    const double err = probs[j] - (j == static_cast<std::size_t>(center) ? 1.0 : 0.0);
    auto out_row = output_.row(j);
    for (std::size_t k = 0; k < d; ++k) {
      grad_output(j, k) = err * hidden[k];
      hidden_grad[k] += err * out_row[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(context.size());
  for (int c : context) {
    for (std::size_t k = 0; k < d; ++k) grad_input(static_cast<std::size_t>(c), k) += hidden_grad[k] * inv;
  }
}

double CbowNetwork::train_step(std::span<const int> context, int center, double learning_rate) {
  forward(context, hidden_, probs_);
  const auto d = static_cast<std::size_t>(dim_);
  const auto m = static_cast<std::size_t>(vocab_size_);
  const double loss = -std::log(probs_[static_cast<std::size_t>(center)]);

  hidden_grad_.assign(d, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (!active_[j]) continue;
    const double err = probs_[j] - (j == static_cast<std::size_t>(center) ? 1.0 : 0.0);
    auto out_row = output_.row(j);
    for (std::size_t k = 0; k < d; ++k) {
      hidden_grad_[k] += err * out_row[k];
      out_row[k] -= learning_rate * err * hidden_[k];
    }
  }
  const double step = learning_rate / static_cast<double>(context.size());
  for (int c : context) {
    auto in_row = input_.row(static_cast<std::size_t>(c));
    for (std::size_t k = 0; k < d; ++k) in_row[k] -= step * hidden_grad_[k];
  }
  return loss;
}

EmbeddingSet CbowNetwork::embeddings() const { return EmbeddingSet{vocab_size_, dim_, output_}; }

Word2VecResult train_word2vec_cbow(std::span<const hmm::Sequence> seqs, int vocab_size,
                                   const Word2VecConfig& config) {
  config.validate();
  if (seqs.empty()) throw InputError("word2vec: no training sequences");
  std::size_t total_tokens = 0;
  std::vector<bool> seen(static_cast<std::size_t>(vocab_size), false);
  for (const auto& s : seqs) {
    total_tokens += s.size();
    for (int o : s) {
      if (o < 0 || o >= vocab_size) throw InputError("word2vec: symbol index out of range");
    }
  }
  if (total_tokens <= static_cast<std::size_t>(2 * config.window)) {
    throw InsufficientDataError("word2vec: need more than 2*window tokens");
  }

  // A symbol is a prediction target iff it sits in a sequence of length >= 2.
  for (const auto& s : seqs) {
    if (s.size() < 2) continue;
    for (int o : s) seen[static_cast<std::size_t>(o)] = true;
  }
  CbowNetwork net(vocab_size, config.dim, config.seed);
  net.set_active(seen);
  const double total_steps = static_cast<double>(config.epochs) * static_cast<double>(total_tokens);
  double processed = 0.0;
  double last_epoch_loss = 0.0;
  std::vector<int> context;
  context.reserve(static_cast<std::size_t>(2 * config.window));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (const auto& s : seqs) {
      const auto t_len = static_cast<std::ptrdiff_t>(s.size());
      for (std::ptrdiff_t t = 0; t < t_len; ++t) {
        const double lr = std::max(config.min_learning_rate,
                                   config.learning_rate * (1.0 - processed / total_steps));
        processed += 1.0;
        context.clear();
        const auto lo = std::max<std::ptrdiff_t>(0, t - config.window);
        const auto hi = std::min<std::ptrdiff_t>(t_len - 1, t + config.window);
        for (auto c = lo; c <= hi; ++c) {
          if (c != t) context.push_back(s[static_cast<std::size_t>(c)]);
        }
        if (context.empty()) continue;
        const int center = s[static_cast<std::size_t>(t)];
        epoch_loss += net.train_step(context, center, lr);
        ++epoch_steps;
      }
    }
    last_epoch_loss = epoch_steps ? epoch_loss / static_cast<double>(epoch_steps) : 0.0;
  }

  Word2VecResult result{net.embeddings(), {}, last_epoch_loss};
  for (int i = 0; i < vocab_size; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) result.unobserved.push_back(i);
  }
  result.embeddings.validate();
  return result;
}

std::string to_text(const EmbeddingSet& set) {
  std::ostringstream out;
  out << "EMB " << set.vocab_size << ' ' << set.dim << '\n';
  for (int i = 0; i < set.vocab_size; ++i) {
    auto row = set.vector(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ' ';
      out << format_double(row[k]);
    }
    out << '\n';
  }
  return out.str();
}

EmbeddingSet embedding_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tag;
  int m = 0;
  int d = 0;
  if (!(in >> tag >> m >> d) || tag != "EMB" || m < 1 || d < 1) {
    throw InputError("embedding file: header must be 'EMB M dim'");
  }
  EmbeddingSet set{m, d, Matrix(static_cast<std::size_t>(m), static_cast<std::size_t>(d))};
  for (double& v : set.vectors.values()) {
    std::string token;
    if (!(in >> token)) throw InputError("embedding file: too few values");
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || p != token.data() + token.size()) throw InputError("embedding file: malformed number");
  }
  std::string extra;
  if (in >> extra) throw InputError("embedding file: too many values");
  set.validate();
  return set;
}

}  // namespace opdrift::embeddings
