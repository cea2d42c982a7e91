#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opdrift/corpus.hpp"
#include "opdrift/embeddings.hpp"
#include "opdrift/hmm.hpp"
#include "opdrift/logreg.hpp"
#include "opdrift/month.hpp"

namespace opdrift::detectors {

enum class Method { kLr, kHmm1, kHmm2, kHmm2Vec, kW2v };

// "LR", "HMM1", "HMM2", "HMM2VEC", "W2V"
std::string_view method_name(Method method) noexcept;
// Case-insensitive; also accepts the CLI spellings lr|hmm1|hmm2|hmm2vec|w2v.
Method parse_method(std::string_view name);

// One family's samples encoded against a family-wide vocabulary.
struct FamilyData {
  std::string family;
  corpus::Vocabulary vocab;
  std::vector<corpus::EncodedSample> samples;  // chronological

  int vocab_size() const noexcept { return vocab.size(); }
};

// Builds the top-k vocabulary over all of `samples` and encodes them.
FamilyData prepare_family(std::string family, std::span<const corpus::Sample> samples, int top_k);

// Same vocabulary, only the samples whose month lies in [first, last].
FamilyData restrict_months(const FamilyData& data, Month first, Month last);

struct TimelinePoint {
  Month at;
  double value;

  std::string label() const { return at.label(); }
};

struct Timeline {
  std::string family;
  Method method = Method::kHmm2;
  std::vector<TimelinePoint> points;  // strictly increasing `at`, finite values
  std::vector<Month> gaps;            // positions where no value could be computed

  std::vector<double> values() const;
};

// --- pipelines ---------------------------------------------------------------

// Receives every trained model as (file name, serialized text), in training order.
using ModelSink = std::function<void(const std::string& name, const std::string& text)>;

struct LrTimelineConfig {
  logreg::LogRegConfig train;
  int history_months = 12;
};

enum class Aggregate { kMean, kMedian };

struct HmmPipelineConfig {
  hmm::HmmTrainConfig hmm;  // hmm.seed is the master seed for the pipeline
  int min_samples = 3;
  Aggregate aggregate = Aggregate::kMean;  // approach 1 point statistic
  double train_fraction = 0.75;            // approach 2 split
  bool normalize_scorevec = false;         // approach 2: divide distances by sqrt(m)
  int window_months = 12;                  // HMM2Vec windows
  int slide_months = 1;
  // When false every month/window model starts from the master seed's
  // initialization instead of a per-window derived seed.
  bool per_window_seed = true;
};

struct Word2VecTimelineConfig {
  embeddings::Word2VecConfig w2v;  // w2v.seed is the master seed
  int min_samples = 3;
  int window_months = 12;
  int slide_months = 1;
  bool per_window_seed = true;
};

// For each month m with a populated history: +1 class = samples of the
// preceding `history_months` months, -1 class = month m. Point at m is the
// weight distance between the models of months m-1 and m.
Timeline lr_timeline(const FamilyData& data, const LrTimelineConfig& config, const ModelSink& sink = {});

// The first populated month is held out; every later month with at least
// min_samples trains a model, and the point is the mean (or median) LLPO of
// the held-out samples under that model.
Timeline hmm_approach1(const FamilyData& data, const HmmPipelineConfig& config, const ModelSink& sink = {});

// Adjacent months X, Y: each split train/test, one model per month, test
// samples of X scored by both models give d_X (Euclidean), likewise d_Y; the
// point at Y is (d_X + d_Y) / 2.
Timeline hmm_approach2(const FamilyData& data, const HmmPipelineConfig& config, const ModelSink& sink = {});

// One HMM per sliding window; point at window i is hmm2vec_distance to
// window i-1.
Timeline hmm2vec_timeline(const FamilyData& data, const HmmPipelineConfig& config, const ModelSink& sink = {});

// One CBOW model per sliding window over the family vocabulary; point at
// window i is concat_distance to window i-1.
Timeline word2vec_timeline(const FamilyData& data, const Word2VecTimelineConfig& config, const ModelSink& sink = {});

// --- spikes --------------------------------------------------------------------

struct Spike {
  Month at;
  double value;
  double z_score;
};

struct SpikeReport {
  std::vector<Spike> spikes;  // z_score descending
  double threshold_k = 2.0;
};

// Robust scale of a series: 1.4826 * MAD, falling back to 1.2533 * mean
// absolute deviation from the median when the MAD is zero. Zero only for a
// constant series.
double robust_sigma(std::span<const double> values);
double median(std::vector<double> values);

// Flags points with value > median + k * robust_sigma. Requires >= 4 points
// (InsufficientDataError); a constant series yields no spikes.
SpikeReport detect_spikes(const Timeline& timeline, double k = 2.0);

// --- two-phase drill-down --------------------------------------------------

enum class CoarseMethod { kWord2Vec, kHmm2Vec };

struct TwoPhaseConfig {
  CoarseMethod coarse = CoarseMethod::kWord2Vec;
  double spike_k = 2.0;
  HmmPipelineConfig hmm;
  Word2VecTimelineConfig w2v;
};

struct Refinement {
  Spike coarse;
  corpus::TimeWindow window;        // months phase 2 was restricted to
  Timeline refined;                 // HMM approach 2 over `window`
  std::optional<TimelinePoint> peak;  // refined evolution month, if any point exists
};

struct DrillDownReport {
  std::string family;
  Timeline coarse;
  SpikeReport spikes;
  std::vector<Refinement> refinements;  // one per coarse spike, same order

  bool phase2_skipped() const noexcept { return spikes.spikes.empty(); }
};

// Year-scale timeline + spikes, then HMM approach 2 inside each spiking window.
DrillDownReport two_phase(const FamilyData& data, const TwoPhaseConfig& config);

// Phase 2 alone, for a coarse timeline already computed with config's coarse
// method and window length.
DrillDownReport drill_down(const FamilyData& data, Timeline coarse, const TwoPhaseConfig& config);

}  // namespace opdrift::detectors
