#include "opdrift/logreg.hpp"

#include <cmath>
#include <sstream>

#include "opdrift/error.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::logreg {

namespace {

void check_dims(const LogRegModel& model, std::span<const FeatureVector> xs) {
  for (const auto& x : xs) {
    if (x.size() != model.weights.size()) throw InputError("logreg: feature dimension mismatch");
  }
}

// ln(1 + e^x) without overflow.
double softplus(double x) noexcept { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

FeatureVector featurize(std::span<const int> indices, int vocab_size) {
  if (indices.empty()) throw InputError("featurize: empty sample");
  if (vocab_size < 1) throw InputError("featurize: vocab_size must be >= 1");
  FeatureVector f(static_cast<std::size_t>(vocab_size), 0.0);
  for (int i : indices) {
    if (i < 0 || i >= vocab_size) throw InputError("featurize: index out of range");
    f[static_cast<std::size_t>(i)] += 1.0;
  }
  const double n = static_cast<double>(indices.size());
  for (double& v : f) v /= n;
  return f;
}

double LogRegModel::decision(std::span<const double> x) const {
  if (x.size() != weights.size()) throw InputError("logreg: feature dimension mismatch");
  double z = bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += weights[j] * x[j];
  return z;
}

void LogRegConfig::validate() const {
  if (epochs < 1) throw InputError("logreg epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InputError("logreg learning_rate must be > 0");
  if (!(l2 >= 0.0)) throw InputError("logreg l2 must be >= 0");
}

double loss(const LogRegModel& model, std::span<const FeatureVector> pos, std::span<const FeatureVector> neg,
            double l2) {
  check_dims(model, pos);
  check_dims(model, neg);
  double total = 0.0;
  // -ln sigmoid(z) = softplus(-z); -ln(1 - sigmoid(z)) = softplus(z)
  for (const auto& x : pos) total += softplus(-model.decision(x));
  for (const auto& x : neg) total += softplus(model.decision(x));
  const double n = static_cast<double>(pos.size() + neg.size());
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  return total / n + 0.5 * l2 * reg;
}

Gradient gradient(const LogRegModel& model, std::span<const FeatureVector> pos, std::span<const FeatureVector> neg,
                  double l2) {
  check_dims(model, pos);
  check_dims(model, neg);
  const std::size_t dim = model.weights.size();
  Gradient g{std::vector<double>(dim, 0.0), 0.0};
  auto add = [&](const FeatureVector& x, double label) {
    const double err = model.probability(x) - label;
    for (std::size_t j = 0; j < dim; ++j) g.weights[j] += err * x[j];
    g.bias += err;
  };
  for (const auto& x : pos) add(x, 1.0);
  for (const auto& x : neg) add(x, 0.0);
  const double n = static_cast<double>(pos.size() + neg.size());
  for (std::size_t j = 0; j < dim; ++j) g.weights[j] = g.weights[j] / n + l2 * model.weights[j];
  g.bias /= n;
  return g;
}

LogRegModel train_logreg(std::span<const FeatureVector> pos, std::span<const FeatureVector> neg,
                         const LogRegConfig& config) {
  config.validate();
  if (pos.empty() || neg.empty()) throw InputError("train_logreg: both classes need samples");
  LogRegModel model{std::vector<double>(pos.front().size(), 0.0), 0.0};
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Gradient g = gradient(model, pos, neg, config.l2);
    for (std::size_t j = 0; j < model.weights.size(); ++j) model.weights[j] -= config.learning_rate * g.weights[j];
    model.bias -= config.learning_rate * g.bias;
  }
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw NumericError("train_logreg: weights diverged");
  }
  return model;
}

double accuracy(const LogRegModel& model, std::span<const FeatureVector> pos, std::span<const FeatureVector> neg) {
  const std::size_t n = pos.size() + neg.size();
  if (n == 0) throw InputError("accuracy: no samples");
  std::size_t correct = 0;
  for (const auto& x : pos) correct += model.predict(x) == 1 ? 1 : 0;
  for (const auto& x : neg) correct += model.predict(x) == -1 ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(n);
}

double weight_distance(const LogRegModel& lhs, const LogRegModel& rhs, bool include_bias) {
  if (lhs.weights.size() != rhs.weights.size()) throw InputError("weight_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < lhs.weights.size(); ++j) {
    const double d = lhs.weights[j] - rhs.weights[j];
    s += d * d;
  }
  if (include_bias) s += (lhs.bias - rhs.bias) * (lhs.bias - rhs.bias);
  return std::sqrt(s);
}

std::string to_text(const LogRegModel& model) {
  std::ostringstream out;
  out << "LOGREG " << model.weights.size() << '\n';
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    if (j) out << ' ';
    out << format_double(model.weights[j]);
  }
  out << '\n' << format_double(model.bias) << '\n';
  return out.str();
}

LogRegModel from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tag;
  long long m = 0;
  if (!(in >> tag >> m) || tag != "LOGREG" || m < 1) throw InputError("logreg file: header must be 'LOGREG M'");
  LogRegModel model{std::vector<double>(static_cast<std::size_t>(m)), 0.0};
  std::string token;
  auto read = [&](double& v) {
    if (!(in >> token)) throw InputError("logreg file: too few values");
    std::size_t used = 0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw InputError("logreg file: malformed number '" + token + "'");
  };
  for (double& w : model.weights) read(w);
  read(model.bias);
  if (in >> token) throw InputError("logreg file: trailing data");
  return model;
}

}  // namespace opdrift::logreg
