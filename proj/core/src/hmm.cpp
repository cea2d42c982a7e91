#include "opdrift/hmm.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "opdrift/error.hpp"
#include "opdrift/random.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::hmm {

namespace {

void check_row(std::span<const double> row, double tol, const char* what) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0 && v <= 1.0)) throw NumericError(std::string(what) + ": entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw NumericError(std::string(what) + ": row does not sum to 1");
}

void jittered_row(std::span<double> row, Rng& rng) {
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  const double base = 1.0 / static_cast<double>(row.size());
  double sum = 0.0;
  for (double& v : row) {
    v = base * (1.0 + jitter(rng));
    sum += v;
  }
  for (double& v : row) v /= sum;
}

void floor_and_normalize(std::span<double> row, double floor) {
  double sum = 0.0;
  for (double& v : row) {
    if (v < floor) v = floor;
    sum += v;
  }
  for (double& v : row) v /= sum;
}

void check_sequence(const HmmModel& model, Sequence seq) {
  if (seq.empty()) throw InputError("empty observation sequence");
  for (int o : seq) {
    if (o < 0 || o >= model.n_symbols) throw InputError("observation index out of range");
  }
}

// Expected-count accumulators for one Baum-Welch iteration.
struct Counts {
  Counts(int n, int m) : pi(n, 0.0), a_num(n, n), a_den(n, 0.0), b_num(n, m), b_den(n, 0.0) {}

  void clear() {
    std::fill(pi.begin(), pi.end(), 0.0);
    a_num.fill(0.0);
    std::fill(a_den.begin(), a_den.end(), 0.0);
    b_num.fill(0.0);
    std::fill(b_den.begin(), b_den.end(), 0.0);
  }

  std::vector<double> pi;
  Matrix a_num;
  std::vector<double> a_den;
  Matrix b_num;
  std::vector<double> b_den;
};

// Scaled forward-backward over one sequence at a time, adding expected counts.
// The model is copied into flat local buffers (B transposed so the column for
// one symbol is contiguous), which keeps the inner loops free of aliasing.
class ForwardBackward {
 public:
  void load(const HmmModel& model) {
    n_ = static_cast<std::size_t>(model.n_states);
    m_ = static_cast<std::size_t>(model.n_symbols);
    a_.assign(model.a.values().begin(), model.a.values().end());
    bt_.resize(m_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < m_; ++k) bt_[k * n_ + i] = model.b(i, k);
    }
    pi_ = model.pi;
    xi_.resize(n_ * n_);
    gb_.resize(m_ * n_);
    beta_.resize(2 * n_);
    w_.resize(n_);
  }

  // Returns ln P(seq | model).
  double accumulate(Sequence seq, Counts& counts) {
    switch (n_) {
      case 2: return accumulate_impl<2>(seq, counts);
      case 3: return accumulate_impl<3>(seq, counts);
      default: return accumulate_impl<0>(seq, counts);
    }
  }

 private:
  // kN fixes the state count at compile time so small models unroll; 0 means
  // use n_.
  template <std::size_t kN>
  double accumulate_impl(Sequence seq, Counts& counts) {
    const std::size_t n = kN != 0 ? kN : n_;
    const std::size_t t_len = seq.size();
    alpha_.resize(t_len * n);
    inv_scale_.resize(t_len);
    const double* __restrict a = a_.data();
    const double* __restrict bt = bt_.data();
    double* __restrict alpha = alpha_.data();
    double* __restrict inv_scale = inv_scale_.data();

    // alpha pass; each alpha row is normalized to sum 1 and the normalizers c_t
    // give ln P = sum ln c_t. Their logs are taken in batches.
    double log_likelihood = 0.0;
    double product = 1.0;  // scale factors not yet folded into log_likelihood
    for (std::size_t t = 0; t < t_len; ++t) {
      const double* bo = bt + static_cast<std::size_t>(seq[t]) * n;
      double* at = alpha + t * n;
      double c = 0.0;
      if (t == 0) {
        for (std::size_t i = 0; i < n; ++i) {
          at[i] = pi_[i] * bo[i];
          c += at[i];
        }
      } else {
        const double* prev = at - n;
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i) s += prev[i] * a[i * n + j];
          at[j] = s * bo[j];
          c += at[j];
        }
      }
      if (!(c > 0.0)) throw NumericError("Baum-Welch: observation has zero probability under the model");
      const double inv = 1.0 / c;
      for (std::size_t i = 0; i < n; ++i) at[i] *= inv;
      inv_scale[t] = inv;
      if (c < 1e-50) {
        log_likelihood += std::log(c);
      } else {
        product *= c;
        if (product < 1e-250) {
          log_likelihood += std::log(product);
          product = 1.0;
        }
      }
    }
    log_likelihood += std::log(product);

    // Backward sweep, scaled by the same normalizers, folding in the gamma and
    // di-gamma counts as each beta row becomes available.
    double* __restrict xi = xi_.data();
    double* __restrict gb = gb_.data();
    double* __restrict w = w_.data();
    double* __restrict beta = beta_.data();
    double* __restrict beta_next = beta_.data() + n;
    std::fill(xi_.begin(), xi_.end(), 0.0);
    std::fill(gb_.begin(), gb_.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) beta[i] = 1.0;
    const double* last = alpha + (t_len - 1) * n;
    double* gl = gb + static_cast<std::size_t>(seq[t_len - 1]) * n;
    for (std::size_t i = 0; i < n; ++i) gl[i] += last[i];
    for (std::size_t t = t_len - 1; t-- > 0;) {
      std::swap(beta, beta_next);
      const double* at = alpha + t * n;
      const double* bo_next = bt + static_cast<std::size_t>(seq[t + 1]) * n;
      const double inv = inv_scale[t + 1];
      for (std::size_t j = 0; j < n; ++j) w[j] = bo_next[j] * beta_next[j] * inv;
      double* g = gb + static_cast<std::size_t>(seq[t]) * n;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double x = a[i * n + j] * w[j];
          xi[i * n + j] += at[i] * x;
          s += x;
        }
        beta[i] = s;
        g[i] += at[i] * s;
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      counts.pi[i] += alpha[i] * beta[i];
      for (std::size_t j = 0; j < n; ++j) counts.a_num(i, j) += xi[i * n + j];
      double total = 0.0;
      for (std::size_t k = 0; k < m_; ++k) {
        counts.b_num(i, k) += gb[k * n + i];
        total += gb[k * n + i];
      }
      counts.b_den[i] += total;
      counts.a_den[i] += total - last[i];
    }
    return log_likelihood;
  }

  std::size_t n_ = 0, m_ = 0;
  std::vector<double> a_, bt_, pi_;
  std::vector<double> alpha_, beta_, w_, inv_scale_, xi_, gb_;
};

HmmModel reestimate(const HmmModel& current, const Counts& counts, std::size_t n_seqs, double floor) {
  HmmModel next = current;
  const auto n = static_cast<std::size_t>(current.n_states);
  const auto m = static_cast<std::size_t>(current.n_symbols);

  for (std::size_t i = 0; i < n; ++i) next.pi[i] = counts.pi[i] / static_cast<double>(n_seqs);
  floor_and_normalize(next.pi, floor);

  for (std::size_t i = 0; i < n; ++i) {
    // A state that is never occupied keeps its previous rows.
    if (counts.a_den[i] > 0.0) {
      for (std::size_t j = 0; j < n; ++j) next.a(i, j) = counts.a_num(i, j) / counts.a_den[i];
    }
    if (counts.b_den[i] > 0.0) {
      for (std::size_t k = 0; k < m; ++k) next.b(i, k) = counts.b_num(i, k) / counts.b_den[i];
    }
    floor_and_normalize(next.a.row(i), floor);
    floor_and_normalize(next.b.row(i), floor);
  }
  return next;
}

TrainResult train_once(std::span<const Sequence> seqs, int n_symbols, const HmmTrainConfig& config,
                       std::uint64_t seed) {
  TrainResult result{init_model(config.n_states, n_symbols, seed), {}, false};
  Counts counts(config.n_states, n_symbols);
  ForwardBackward fb;

  auto e_step = [&](const HmmModel& model) {
    counts.clear();
    fb.load(model);
    double total = 0.0;
    for (const auto& s : seqs) total += fb.accumulate(s, counts);
    return total;
  };

  double ll = e_step(result.model);
  result.trace.push_back(ll);
  for (int iter = 0; iter < config.max_iters; ++iter) {
    HmmModel next = reestimate(result.model, counts, seqs.size(), config.prob_floor);
    const double next_ll = e_step(next);
    result.model = std::move(next);
    result.trace.push_back(next_ll);
    if (next_ll - ll < config.tol) {
      result.converged = true;
      break;
    }
    ll = next_ll;
  }
  return result;
}

std::vector<double> parse_doubles(std::string_view line, std::size_t expected, const char* what) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{}) throw InputError(std::string(what) + ": malformed number");
    out.push_back(v);
    p = next;
  }
  if (out.size() != expected) throw InputError(std::string(what) + ": wrong number of values");
  return out;
}

}  // namespace

void HmmModel::validate(double tol) const {
  if (n_states < 1 || n_symbols < 1) throw NumericError("HMM dimensions must be positive");
  const auto n = static_cast<std::size_t>(n_states);
  const auto m = static_cast<std::size_t>(n_symbols);
  if (a.rows() != n || a.cols() != n || b.rows() != n || b.cols() != m || pi.size() != n) {
    throw NumericError("HMM matrix shapes disagree with N, M");
  }
  for (std::size_t i = 0; i < n; ++i) {
    check_row(a.row(i), tol, "A");
    check_row(b.row(i), tol, "B");
  }
  check_row(pi, tol, "pi");
}

void HmmTrainConfig::validate() const {
  if (n_states < 1) throw InputError("n_states must be >= 1");
  if (max_iters < 1) throw InputError("max_iters must be >= 1");
  if (!(tol > 0.0)) throw InputError("tol must be > 0");
  if (restarts < 1) throw InputError("restarts must be >= 1");
  if (!(prob_floor >= 0.0 && prob_floor < 1e-3)) throw InputError("prob_floor must lie in [0, 1e-3)");
}

HmmModel init_model(int n_states, int n_symbols, std::uint64_t seed) {
  if (n_states < 1 || n_symbols < 1) throw InputError("init_model: dimensions must be >= 1");
  const auto n = static_cast<std::size_t>(n_states);
  const auto m = static_cast<std::size_t>(n_symbols);
  HmmModel model{n_states, n_symbols, Matrix(n, n), Matrix(n, m), std::vector<double>(n)};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) jittered_row(model.a.row(i), rng);
  for (std::size_t i = 0; i < n; ++i) jittered_row(model.b.row(i), rng);
  jittered_row(model.pi, rng);
  return model;
}

double forward_log_likelihood(const HmmModel& model, Sequence seq) {
  check_sequence(model, seq);
  const auto n = static_cast<std::size_t>(model.n_states);
  std::vector<double> alpha(n), next(n);
  double log_likelihood = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto o = static_cast<std::size_t>(seq[t]);
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      if (t == 0) {
        s = model.pi[j];
      } else {
        for (std::size_t i = 0; i < n; ++i) s += alpha[i] * model.a(i, j);
      }
      next[j] = s * model.b(j, o);
      c += next[j];
    }
    if (!(c > 0.0)) return kImpossible;
    for (std::size_t j = 0; j < n; ++j) alpha[j] = next[j] / c;
    log_likelihood += std::log(c);
  }
  return log_likelihood;
}

double llpo(const HmmModel& model, Sequence seq) {
  const double ll = forward_log_likelihood(model, seq);
  return is_impossible(ll) ? kImpossible : ll / static_cast<double>(seq.size());
}

TrainResult baum_welch(std::span<const Sequence> seqs, int n_symbols, const HmmTrainConfig& config) {
  config.validate();
  if (seqs.empty()) throw InputError("baum_welch: no training sequences");
  if (n_symbols < 1) throw InputError("baum_welch: n_symbols must be >= 1");
  for (const auto& s : seqs) {
    if (s.size() < 2) throw InputError("baum_welch: training sequences need at least 2 symbols");
    for (int o : s) {
      if (o < 0 || o >= n_symbols) throw InputError("baum_welch: observation index out of range");
    }
  }

  TrainResult best = train_once(seqs, n_symbols, config, config.seed);
  for (int r = 1; r < config.restarts; ++r) {
    TrainResult candidate = train_once(seqs, n_symbols, config, derive_seed(config.seed, "hmm.restart", r));
    if (candidate.trace.back() > best.trace.back()) best = std::move(candidate);
  }
  return best;
}

std::string to_text(const HmmModel& model) {
  std::ostringstream out;
  out << "HMM " << model.n_states << ' ' << model.n_symbols << '\n';
  auto write_row = [&](std::span<const double> row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ' ';
      out << format_double(row[k]);
    }
    out << '\n';
  };
  for (std::size_t i = 0; i < model.a.rows(); ++i) write_row(model.a.row(i));
  for (std::size_t i = 0; i < model.b.rows(); ++i) write_row(model.b.row(i));
  write_row(model.pi);
  return out.str();
}

HmmModel from_text(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw InputError("HMM file: empty");

  std::istringstream header{std::string(lines[0])};
  std::string tag;
  int n = 0;
  int m = 0;
  if (!(header >> tag >> n >> m) || tag != "HMM" || n < 1 || m < 1) {
    throw InputError("HMM file: header must be 'HMM N M'");
  }
  const auto un = static_cast<std::size_t>(n);
  const auto um = static_cast<std::size_t>(m);
  if (lines.size() != 1 + 2 * un + 1) throw InputError("HMM file: expected " + std::to_string(2 * n + 2) + " lines");

  HmmModel model{n, m, Matrix(un, un), Matrix(un, um), {}};
  for (std::size_t i = 0; i < un; ++i) {
    auto row = parse_doubles(lines[1 + i], un, "HMM file A row");
    std::copy(row.begin(), row.end(), model.a.row(i).begin());
  }
  for (std::size_t i = 0; i < un; ++i) {
    auto row = parse_doubles(lines[1 + un + i], um, "HMM file B row");
    std::copy(row.begin(), row.end(), model.b.row(i).begin());
  }
  model.pi = parse_doubles(lines[1 + 2 * un], un, "HMM file pi row");
  model.validate(1e-6);
  return model;
}

}  // namespace opdrift::hmm
