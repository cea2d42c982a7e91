#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace opdrift::logreg {

// 1 / (1 + e^-x), evaluated without overflow for large |x|.
double sigmoid(double x) noexcept;

// Relative symbol frequencies over an M-symbol vocabulary.
using FeatureVector = std::vector<double>;

FeatureVector featurize(std::span<const int> indices, int vocab_size);

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;

  double decision(std::span<const double> x) const;
  double probability(std::span<const double> x) const { return sigmoid(decision(x)); }
  // +1 when probability > 0.5 (equivalently decision > 0), else -1.
  int predict(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : -1; }

  friend bool operator==(const LogRegModel&, const LogRegModel&) = default;
};

struct LogRegConfig {
  int epochs = 500;
  double learning_rate = 0.1;
  double l2 = 1e-4;

  void validate() const;
};

// Mean cross-entropy over both classes (pos labelled 1, neg 0) plus (l2/2)|w|^2.
double loss(const LogRegModel& model, std::span<const FeatureVector> pos, std::span<const FeatureVector> neg,
            double l2);

struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};

Gradient gradient(const LogRegModel& model, std::span<const FeatureVector> pos, std::span<const FeatureVector> neg,
                  double l2);

// Full-batch gradient descent from zero weights.
LogRegModel train_logreg(std::span<const FeatureVector> pos, std::span<const FeatureVector> neg,
                         const LogRegConfig& config);

// Fraction of samples classified correctly (pos as +1, neg as -1).
double accuracy(const LogRegModel& model, std::span<const FeatureVector> pos, std::span<const FeatureVector> neg);

// Euclidean distance between weight vectors; the bias joins only on request.
double weight_distance(const LogRegModel& lhs, const LogRegModel& rhs, bool include_bias = false);

// "LOGREG M", weight row, bias line.
std::string to_text(const LogRegModel& model);
LogRegModel from_text(std::string_view text);

}  // namespace opdrift::logreg
