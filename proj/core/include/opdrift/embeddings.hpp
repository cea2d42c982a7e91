#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opdrift/hmm.hpp"
#include "opdrift/matrix.hpp"

namespace opdrift::embeddings {

// Row i is the embedding of vocabulary symbol i.
struct EmbeddingSet {
  int vocab_size = 0;
  int dim = 0;
  Matrix vectors;  // vocab_size x dim

  std::span<const double> vector(int symbol) const { return vectors.row(static_cast<std::size_t>(symbol)); }
  void validate() const;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

// HMM2Vec: symbol i is embedded as column i of B (length N).
EmbeddingSet hmm2vec(const hmm::HmmModel& model);

// Throws InputError on length mismatch or a zero vector.
double cosine_similarity(std::span<const double> x, std::span<const double> y);
std::vector<double> normalize(std::span<const double> x);

// Euclidean distance between the row-major concatenations of two embedding
// sets over the same vocabulary ordering.
double concat_distance(const EmbeddingSet& lhs, const EmbeddingSet& rhs);

// Distance between the B matrices of two HMMs, minimized over relabelings of
// the hidden states (both orderings for N=2, all N! for larger N up to
// `max_states`). Symmetric and invariant to state relabeling.
double hmm2vec_distance(const hmm::HmmModel& lhs, const hmm::HmmModel& rhs, int max_states = 6);

// --- CBOW Word2Vec -----------------------------------------------------------

struct Word2VecConfig {
  int dim = 2;      // V
  int window = 5;   // W, context words on each side
  int epochs = 5;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingPair {
  int center;
  int context;
  friend auto operator<=>(const TrainingPair&, const TrainingPair&) = default;
};

// All (center, context) pairs with |offset| <= window inside one sequence.
std::vector<TrainingPair> training_pairs(hmm::Sequence seq, int window);

// Single hidden layer of `dim` linear units between a one-hot input and a
// full softmax output. The input to the hidden layer is the mean of the
// context words' input rows; row i of output_weights() holds the weights
// from the hidden layer into output node i.
class CbowNetwork {
 public:
  CbowNetwork(int vocab_size, int dim, std::uint64_t seed);

  int vocab_size() const noexcept { return vocab_size_; }
  int dim() const noexcept { return dim_; }

  // Restricts the softmax to symbols with active[i] == true; inactive output
  // rows are never read or written. All symbols start active.
  void set_active(std::vector<bool> active);

  // -ln p(center | context)
  double loss(std::span<const int> context, int center) const;

  // Gradients of loss() with respect to both weight matrices. Outputs are
  // resized and overwritten.
  void gradients(std::span<const int> context, int center, Matrix& grad_input, Matrix& grad_output) const;

  // One SGD update; returns the loss before the update.
  double train_step(std::span<const int> context, int center, double learning_rate);

  Matrix& input_weights() noexcept { return input_; }
  const Matrix& input_weights() const noexcept { return input_; }
  Matrix& output_weights() noexcept { return output_; }
  const Matrix& output_weights() const noexcept { return output_; }

  // Embeddings are the hidden->output weights.
  EmbeddingSet embeddings() const;

 private:
  void forward(std::span<const int> context, std::vector<double>& hidden, std::vector<double>& probs) const;

  int vocab_size_;
  int dim_;
  Matrix input_;   // vocab_size x dim
  Matrix output_;  // vocab_size x dim
  std::vector<bool> active_;
  std::vector<double> hidden_, probs_, hidden_grad_;
};

struct Word2VecResult {
  EmbeddingSet embeddings;
  // Symbols that never appeared as a prediction target. They are left out of
  // the softmax, so their embeddings stay at their initial values.
  std::vector<int> unobserved;
  double mean_loss_last_epoch = 0.0;
};

// Requires at least one sequence and more than 2*window tokens overall.
Word2VecResult train_word2vec_cbow(std::span<const hmm::Sequence> seqs, int vocab_size, const Word2VecConfig& config);

// "EMB M dim" followed by M rows.
std::string to_text(const EmbeddingSet& set);
EmbeddingSet embedding_from_text(std::string_view text);

}  // namespace opdrift::embeddings
