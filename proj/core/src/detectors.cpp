#include "opdrift/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>

#include "opdrift/error.hpp"
#include "opdrift/random.hpp"

namespace opdrift::detectors {

namespace {

using corpus::EncodedSample;

std::vector<hmm::Sequence> sequences(const std::vector<EncodedSample>& samples) {
  return corpus::sequences_of(samples);
}

hmm::HmmModel train_hmm(const std::vector<hmm::Sequence>& seqs, int vocab_size, const hmm::HmmTrainConfig& base,
                        std::uint64_t seed) {
  hmm::HmmTrainConfig cfg = base;
  cfg.seed = seed;
  return hmm::baum_welch(seqs, vocab_size, cfg).model;
}

bool trainable(const std::vector<EncodedSample>& samples, int min_samples) {
  if (static_cast<int>(samples.size()) < min_samples || samples.empty()) return false;
  return std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.indices.size() >= 2; });
}

std::uint64_t model_seed(std::uint64_t master, bool per_window, std::string_view stream, Month month) {
  return derive_seed(master, stream, per_window ? static_cast<std::uint64_t>(month.index()) : 0);
}

void emit(const ModelSink& sink, const std::string& name, const std::string& text) {
  if (sink) sink(name, text);
}

}  // namespace

std::string_view method_name(Method method) noexcept {
  switch (method) {
    case Method::kLr: return "LR";
    case Method::kHmm1: return "HMM1";
    case Method::kHmm2: return "HMM2";
    case Method::kHmm2Vec: return "HMM2VEC";
    case Method::kW2v: return "W2V";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Method m : {Method::kLr, Method::kHmm1, Method::kHmm2, Method::kHmm2Vec, Method::kW2v}) {
    if (upper == method_name(m)) return m;
  }
  throw InputError("unknown method '" + std::string(name) + "'");
}

FamilyData prepare_family(std::string family, std::span<const corpus::Sample> samples, int top_k) {
  if (samples.empty()) throw InsufficientDataError("family '" + family + "' has no samples");
  corpus::Vocabulary vocab = corpus::build_vocabulary(samples, top_k);
  auto encoded = corpus::encode_all(samples, vocab);
  std::stable_sort(encoded.begin(), encoded.end(),
                   [](const EncodedSample& a, const EncodedSample& b) { return a.month < b.month; });
  return FamilyData{std::move(family), std::move(vocab), std::move(encoded)};
}

FamilyData restrict_months(const FamilyData& data, Month first, Month last) {
  FamilyData out{data.family, data.vocab, {}};
  for (const auto& s : data.samples) {
    if (first <= s.month && s.month <= last) out.samples.push_back(s);
  }
  return out;
}

std::vector<double> Timeline::values() const {
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.value);
  return v;
}

// --- logistic regression -----------------------------------------------------

Timeline lr_timeline(const FamilyData& data, const LrTimelineConfig& config, const ModelSink& sink) {
  config.train.validate();
  if (config.history_months < 1) throw InputError("lr_timeline: history_months must be >= 1");
  if (data.samples.empty()) throw InsufficientDataError("lr_timeline: no samples");
  const auto buckets = corpus::monthly_buckets(data.samples);
  const int span = static_cast<int>(buckets.size());
  if (span < config.history_months + 2) {
    throw InsufficientDataError("lr_timeline: data spans " + std::to_string(span) + " months, need at least " +
                                std::to_string(config.history_months + 2));
  }

  std::map<Month, std::vector<logreg::FeatureVector>> features;
  for (const auto& [month, samples] : buckets) {
    auto& f = features[month];
    for (const auto& s : samples) f.push_back(logreg::featurize(s.indices, data.vocab_size()));
  }

  Timeline timeline{data.family, Method::kLr, {}, {}};
  const Month first = buckets.begin()->first;
  const Month last = buckets.rbegin()->first;
  std::optional<logreg::LogRegModel> previous;
  for (Month m = first + config.history_months; m <= last; m = m + 1) {
    std::vector<logreg::FeatureVector> pos;
    for (Month h = m - config.history_months; h < m; h = h + 1) {
      const auto& f = features.at(h);
      pos.insert(pos.end(), f.begin(), f.end());
    }
    const auto& neg = features.at(m);

    std::optional<logreg::LogRegModel> current;
    if (!pos.empty() && !neg.empty()) {
      current = logreg::train_logreg(pos, neg, config.train);
      emit(sink, m.label() + ".logreg", logreg::to_text(*current));
    }
    if (m > first + config.history_months) {
      if (previous && current) {
        timeline.points.push_back({m, logreg::weight_distance(*previous, *current)});
      } else {
        timeline.gaps.push_back(m);
      }
    }
    previous = std::move(current);
  }
  return timeline;
}

// --- HMM approach 1 ----------------------------------------------------------

Timeline hmm_approach1(const FamilyData& data, const HmmPipelineConfig& config, const ModelSink& sink) {
  config.hmm.validate();
  if (data.samples.empty()) throw InsufficientDataError("hmm_approach1: no samples");
  const auto buckets = corpus::monthly_buckets(data.samples);
  const auto populated = std::count_if(buckets.begin(), buckets.end(), [](const auto& b) { return !b.second.empty(); });
  if (populated < 3) throw InsufficientDataError("hmm_approach1: needs at least 3 populated months");

  // monthly_buckets starts at the first populated month.
  const auto& reserved = buckets.begin()->second;
  const auto reserved_seqs = sequences(reserved);

  Timeline timeline{data.family, Method::kHmm1, {}, {}};
  for (auto it = std::next(buckets.begin()); it != buckets.end(); ++it) {
    const Month month = it->first;
    if (!trainable(it->second, config.min_samples)) {
      timeline.gaps.push_back(month);
      continue;
    }
    const auto model = train_hmm(sequences(it->second), data.vocab_size(), config.hmm,
                                 model_seed(config.hmm.seed, config.per_window_seed, "hmm1", month));
    emit(sink, month.label() + ".hmm", hmm::to_text(model));

    std::vector<double> scores;
    for (const auto& seq : reserved_seqs) {
      const double s = hmm::llpo(model, seq);
      if (!hmm::is_impossible(s)) scores.push_back(s);
    }
    if (scores.empty()) {
      timeline.gaps.push_back(month);
      continue;
    }
    const double value = config.aggregate == Aggregate::kMedian
                             ? median(scores)
                             : std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    timeline.points.push_back({month, value});
  }
  return timeline;
}

// --- HMM approach 2 ----------------------------------------------------------

namespace {

struct MonthSplit {
  std::vector<EncodedSample> train;
  std::vector<EncodedSample> test;
};

std::optional<MonthSplit> split_month(const std::vector<EncodedSample>& samples, Month month,
                                      const HmmPipelineConfig& config) {
  const auto n = samples.size();
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - config.train_fraction) + 1e-9));
  if (n_test < 1 || static_cast<int>(n - n_test) < std::max(1, config.min_samples)) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config.hmm.seed, "hmm2.split", static_cast<std::uint64_t>(month.index())));
  std::shuffle(order.begin(), order.end(), rng);

  MonthSplit split;
  for (std::size_t k = 0; k < n; ++k) {
    (k < n - n_test ? split.train : split.test).push_back(samples[order[k]]);
  }
  if (!trainable(split.train, config.min_samples)) return std::nullopt;
  return split;
}

// Euclidean distance between the LLPO vectors of `test` under two models, or
// nullopt when any score is impossible.
std::optional<double> score_distance(const hmm::HmmModel& own, const hmm::HmmModel& other,
                                     const std::vector<EncodedSample>& test, bool normalize) {
  double sum = 0.0;
  for (const auto& s : test) {
    const double a = hmm::llpo(own, s.indices);
    const double b = hmm::llpo(other, s.indices);
    if (hmm::is_impossible(a) || hmm::is_impossible(b)) return std::nullopt;
    sum += (a - b) * (a - b);
  }
  double d = std::sqrt(sum);
  if (normalize) d /= std::sqrt(static_cast<double>(test.size()));
  return d;
}

}  // namespace

Timeline hmm_approach2(const FamilyData& data, const HmmPipelineConfig& config, const ModelSink& sink) {
  config.hmm.validate();
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw InputError("hmm_approach2: train_fraction must lie in (0, 1)");
  }
  if (data.samples.empty()) throw InsufficientDataError("hmm_approach2: no samples");
  const auto buckets = corpus::monthly_buckets(data.samples);
  if (buckets.size() < 2) throw InsufficientDataError("hmm_approach2: needs at least two months");

  struct Trained {
    MonthSplit split;
    hmm::HmmModel model;
  };
  std::map<Month, Trained> trained;
  for (const auto& [month, samples] : buckets) {
    auto split = split_month(samples, month, config);
    if (!split) continue;
    auto model = train_hmm(sequences(split->train), data.vocab_size(), config.hmm,
                           model_seed(config.hmm.seed, config.per_window_seed, "hmm2", month));
    emit(sink, month.label() + ".hmm", hmm::to_text(model));
    trained.emplace(month, Trained{std::move(*split), std::move(model)});
  }

  Timeline timeline{data.family, Method::kHmm2, {}, {}};
  for (auto it = std::next(buckets.begin()); it != buckets.end(); ++it) {
    const Month y = it->first;
    const Month x = y - 1;
    auto tx = trained.find(x);
    auto ty = trained.find(y);
    if (tx == trained.end() || ty == trained.end()) {
      timeline.gaps.push_back(y);
      continue;
    }
    auto d_x = score_distance(tx->second.model, ty->second.model, tx->second.split.test, config.normalize_scorevec);
    auto d_y = score_distance(ty->second.model, tx->second.model, ty->second.split.test, config.normalize_scorevec);
    if (!d_x || !d_y) {
      timeline.gaps.push_back(y);
      continue;
    }
    timeline.points.push_back({y, (*d_x + *d_y) / 2.0});
  }
  return timeline;
}

// --- yearly-window embeddings --------------------------------------------------

Timeline hmm2vec_timeline(const FamilyData& data, const HmmPipelineConfig& config, const ModelSink& sink) {
  config.hmm.validate();
  const auto windows = corpus::sliding_windows(data.samples, config.window_months, config.slide_months);
  if (windows.size() < 2) {
    throw InsufficientDataError("hmm2vec_timeline: needs at least " + std::to_string(config.window_months + config.slide_months) +
                                " months of data");
  }

  Timeline timeline{data.family, Method::kHmm2Vec, {}, {}};
  std::optional<hmm::HmmModel> previous;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    std::optional<hmm::HmmModel> current;
    if (trainable(w.samples, config.min_samples)) {
      current = train_hmm(sequences(w.samples), data.vocab_size(), config.hmm,
                          model_seed(config.hmm.seed, config.per_window_seed, "hmm2vec", w.window.start));
      emit(sink, w.window.label + ".hmm", hmm::to_text(*current));
    }
    if (i > 0) {
      if (previous && current) {
        timeline.points.push_back({w.window.end, embeddings::hmm2vec_distance(*previous, *current)});
      } else {
        timeline.gaps.push_back(w.window.end);
      }
    }
    previous = std::move(current);
  }
  return timeline;
}

Timeline word2vec_timeline(const FamilyData& data, const Word2VecTimelineConfig& config, const ModelSink& sink) {
  config.w2v.validate();
  const auto windows = corpus::sliding_windows(data.samples, config.window_months, config.slide_months);
  if (windows.size() < 2) {
    throw InsufficientDataError("word2vec_timeline: needs at least " +
                                std::to_string(config.window_months + config.slide_months) + " months of data");
  }

  Timeline timeline{data.family, Method::kW2v, {}, {}};
  std::optional<embeddings::EmbeddingSet> previous;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    std::optional<embeddings::EmbeddingSet> current;
    std::size_t tokens = 0;
    for (const auto& s : w.samples) tokens += s.indices.size();
    if (static_cast<int>(w.samples.size()) >= config.min_samples && !w.samples.empty() &&
        tokens > static_cast<std::size_t>(2 * config.w2v.window)) {
      embeddings::Word2VecConfig cfg = config.w2v;
      cfg.seed = model_seed(config.w2v.seed, config.per_window_seed, "w2v", w.window.start);
      const auto seqs = sequences(w.samples);
      current = embeddings::train_word2vec_cbow(seqs, data.vocab_size(), cfg).embeddings;
      emit(sink, w.window.label + ".emb", embeddings::to_text(*current));
    }
    if (i > 0) {
      if (previous && current) {
        timeline.points.push_back({w.window.end, embeddings::concat_distance(*previous, *current)});
      } else {
        timeline.gaps.push_back(w.window.end);
      }
    }
    previous = std::move(current);
  }
  return timeline;
}

// --- spikes --------------------------------------------------------------------

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty series");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

double robust_sigma(std::span<const double> values) {
  const double med = median(std::vector<double>(values.begin(), values.end()));
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double v : values) dev.push_back(std::abs(v - med));
  const double mad = median(dev);
  if (mad > 0.0) return 1.4826 * mad;
  // More than half the points sit exactly on the median.
  const double mean_ad = std::accumulate(dev.begin(), dev.end(), 0.0) / static_cast<double>(dev.size());
  return 1.2533 * mean_ad;
}

SpikeReport detect_spikes(const Timeline& timeline, double k) {
  if (timeline.points.size() < 4) {
    throw InsufficientDataError("detect_spikes: needs at least 4 timeline points, got " +
                                std::to_string(timeline.points.size()));
  }
  const auto values = timeline.values();
  SpikeReport report{{}, k};
  const double sigma = robust_sigma(values);
  if (!(sigma > 0.0)) return report;
  const double med = median(values);
  for (const auto& p : timeline.points) {
    const double z = (p.value - med) / sigma;
    if (z > k) report.spikes.push_back({p.at, p.value, z});
  }
  std::stable_sort(report.spikes.begin(), report.spikes.end(),
                   [](const Spike& a, const Spike& b) { return a.z_score > b.z_score; });
  return report;
}

// --- two-phase -------------------------------------------------------------------

DrillDownReport two_phase(const FamilyData& data, const TwoPhaseConfig& config) {
  Timeline coarse = config.coarse == CoarseMethod::kWord2Vec ? word2vec_timeline(data, config.w2v)
                                                              : hmm2vec_timeline(data, config.hmm);
  return drill_down(data, std::move(coarse), config);
}

DrillDownReport drill_down(const FamilyData& data, Timeline coarse, const TwoPhaseConfig& config) {
  DrillDownReport report;
  report.family = data.family;
  const int window_months =
      config.coarse == CoarseMethod::kWord2Vec ? config.w2v.window_months : config.hmm.window_months;
  report.coarse = std::move(coarse);
  report.spikes = detect_spikes(report.coarse, config.spike_k);

  for (const auto& spike : report.spikes.spikes) {
    Refinement r{spike, corpus::make_window(spike.at - (window_months - 1), window_months), {}, std::nullopt};
    const FamilyData restricted = restrict_months(data, r.window.start, r.window.end);
    r.refined = Timeline{data.family, Method::kHmm2, {}, {}};
    if (!restricted.samples.empty()) {
      try {
        r.refined = hmm_approach2(restricted, config.hmm);
      } catch (const InsufficientDataError&) {
        // Window holds a single month of data; nothing to refine.
      }
    }
    if (!r.refined.points.empty()) {
      r.peak = *std::max_element(r.refined.points.begin(), r.refined.points.end(),
                                 [](const auto& a, const auto& b) { return a.value < b.value; });
    }
    report.refinements.push_back(std::move(r));
  }
  return report;
}

}  // namespace opdrift::detectors
