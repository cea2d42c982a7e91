#include "opdrift/detectors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "opdrift/error.hpp"
#include "opdrift/evaluation.hpp"
#include "opdrift/report_io.hpp"
#include "opdrift/synthgen.hpp"

namespace opdrift::detectors {
namespace {

// Small fixture: quick to train on, with an unmistakable drift when eps is large.
FamilyData small_family(int months, std::vector<int> boundaries, double eps, std::uint64_t seed,
                        int per_month = 8) {
  synthgen::FixtureConfig cfg;
  cfg.family = "small";
  cfg.months = months;
  cfg.boundaries = std::move(boundaries);
  cfg.vocab_size = 8;
  cfg.samples_per_month = per_month;
  cfg.min_length = 80;
  cfg.max_length = 120;
  cfg.epsilon = eps;
  cfg.concentration = 0.3;
  cfg.seed = seed;
  const auto fam = synthgen::generate_family(synthgen::make_family_spec(cfg));
  return prepare_family(cfg.family, fam.samples, 30);
}

FamilyData identical_samples(int months, int per_month) {
  FamilyData data{"same", corpus::Vocabulary({"a", "b", "c"}), {}};
  const std::vector<int> seq{0, 1, 2, 1, 0, 3, 1, 2, 2, 0, 1, 1, 0, 2, 3, 0, 1, 2};
  for (int m = 0; m < months; ++m) {
    for (int s = 0; s < per_month; ++s) {
      data.samples.push_back({"x" + std::to_string(m) + "-" + std::to_string(s), Month{2020, 1} + m, seq});
    }
  }
  return data;
}

void expect_well_formed(const Timeline& t) {
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    EXPECT_TRUE(std::isfinite(t.points[i].value));
    if (i > 0) {
      EXPECT_LT(t.points[i - 1].at, t.points[i].at);
    }
  }
}

TEST(Method, NamesAndParsing) {
  EXPECT_EQ(method_name(Method::kHmm2Vec), "HMM2VEC");
  EXPECT_EQ(parse_method("hmm2vec"), Method::kHmm2Vec);
  EXPECT_EQ(parse_method("W2V"), Method::kW2v);
  EXPECT_THROW(parse_method("svm"), InputError);
}

TEST(PrepareFamily, VocabularyIsFamilyWide) {
  const auto data = small_family(4, {2}, 0.3, 1);
  EXPECT_EQ(data.vocab_size(), 9);  // 8 opcodes + OTHER
  const auto part = restrict_months(data, {2010, 2}, {2010, 3});
  EXPECT_EQ(part.vocab, data.vocab);
  EXPECT_EQ(part.samples.size(), 16u);
  EXPECT_THROW(prepare_family("empty", {}, 30), InsufficientDataError);
}

TEST(LrTimeline, ShapeAndInsufficientSpan) {
  const auto data = small_family(8, {4}, 0.5, 2);
  LrTimelineConfig cfg;
  cfg.history_months = 3;
  int models = 0;
  const auto t = lr_timeline(data, cfg, [&](const std::string& name, const std::string& text) {
    ++models;
    EXPECT_EQ(text.rfind("LOGREG 9", 0), 0u) << name;
  });
  expect_well_formed(t);
  EXPECT_EQ(models, 5);  // months 4..8
  ASSERT_EQ(t.points.size(), 4u);
  EXPECT_EQ(t.points.front().at, (Month{2010, 5}));
  cfg.history_months = 7;
  EXPECT_THROW(lr_timeline(data, cfg), InsufficientDataError);
}

TEST(HmmApproach1, DetectsStrongDriftAsLargestFirstDifference) {
  // Local optima make single runs noisy on a fixture this small; ask for a
  // clear majority.
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = small_family(8, {4}, 1.0, seed, 12);
    HmmPipelineConfig cfg;
    cfg.hmm.seed = 5;
    const auto t = hmm_approach1(data, cfg);
    expect_well_formed(t);
    EXPECT_EQ(t.points.size(), 7u);
    hits += argmax_month(first_differences(t)) == Month{2010, 5};
  }
  EXPECT_GE(hits, 4);
}

TEST(HmmApproach1, SmallMonthsBecomeGapsAndShortSpansFail) {
  auto data = small_family(5, {}, 0.3, 4);
  // Thin out 2010-03 to two samples.
  int kept = 0;
  std::erase_if(data.samples, [&](const corpus::EncodedSample& s) {
    return s.month == Month{2010, 3} && ++kept > 2;
  });
  HmmPipelineConfig cfg;
  const auto t = hmm_approach1(data, cfg);
  EXPECT_EQ(t.gaps, std::vector<Month>{Month(2010, 3)});
  EXPECT_EQ(t.points.size(), 3u);

  EXPECT_THROW(hmm_approach1(restrict_months(data, {2010, 1}, {2010, 2}), cfg), InsufficientDataError);
}

TEST(HmmApproach1, MedianAggregateIsAvailable) {
  const auto data = small_family(4, {}, 0.3, 6);
  HmmPipelineConfig cfg;
  cfg.aggregate = Aggregate::kMedian;
  const auto med = hmm_approach1(data, cfg);
  cfg.aggregate = Aggregate::kMean;
  const auto mean = hmm_approach1(data, cfg);
  ASSERT_EQ(med.points.size(), mean.points.size());
  EXPECT_NE(med.points[0].value, mean.points[0].value);
}

TEST(HmmApproach2, IdenticalTrainingDataGivesZero) {
  const auto data = identical_samples(3, 8);
  HmmPipelineConfig cfg;
  cfg.per_window_seed = false;
  const auto t = hmm_approach2(data, cfg);
  ASSERT_EQ(t.points.size(), 2u);
  for (const auto& p : t.points) EXPECT_LT(p.value, 1e-6);
}

TEST(HmmApproach2, StrongDriftIsTheMaximum) {
  const auto data = small_family(6, {3}, 0.9, 7, 12);
  HmmPipelineConfig cfg;
  cfg.hmm.seed = 2;
  const auto t = hmm_approach2(data, cfg);
  expect_well_formed(t);
  EXPECT_EQ(t.points.size(), 5u);
  EXPECT_EQ(argmax_month(t), (Month{2010, 4}));
}

TEST(HmmApproach2, NormalizationDividesBySqrtTestSize) {
  const auto data = small_family(3, {}, 0.3, 8, 8);  // 2 test samples per month
  HmmPipelineConfig cfg;
  const auto raw = hmm_approach2(data, cfg);
  cfg.normalize_scorevec = true;
  const auto norm = hmm_approach2(data, cfg);
  ASSERT_EQ(raw.points.size(), norm.points.size());
  for (std::size_t i = 0; i < raw.points.size(); ++i) {
    EXPECT_NEAR(norm.points[i].value, raw.points[i].value / std::sqrt(2.0), 1e-12);
  }
}

TEST(HmmApproach2, MonthsTooSmallToSplitAreGaps) {
  auto data = small_family(4, {}, 0.3, 9, 8);
  int kept = 0;
  std::erase_if(data.samples, [&](const corpus::EncodedSample& s) {
    return s.month == Month{2010, 2} && ++kept > 3;
  });
  const auto t = hmm_approach2(data, {});
  // 2010-02 cannot train, so both pairs touching it are gaps.
  EXPECT_EQ(t.gaps, (std::vector<Month>{Month(2010, 2), Month(2010, 3)}));
  EXPECT_EQ(t.points.size(), 1u);
}

TEST(YearlyWindows, IdenticalWindowsGiveZeroDistance) {
  const auto data = identical_samples(5, 3);
  HmmPipelineConfig h;
  h.window_months = 3;
  h.per_window_seed = false;
  const auto hv = hmm2vec_timeline(data, h);
  ASSERT_EQ(hv.points.size(), 2u);
  for (const auto& p : hv.points) EXPECT_EQ(p.value, 0.0);

  Word2VecTimelineConfig w;
  w.window_months = 3;
  w.per_window_seed = false;
  w.w2v.window = 2;
  const auto wv = word2vec_timeline(data, w);
  ASSERT_EQ(wv.points.size(), 2u);
  for (const auto& p : wv.points) EXPECT_EQ(p.value, 0.0);
}

TEST(YearlyWindows, LabelsAreWindowEndsAndSpanIsChecked) {
  const auto data = small_family(6, {}, 0.3, 10, 4);
  HmmPipelineConfig h;
  h.window_months = 4;
  int models = 0;
  const auto hv = hmm2vec_timeline(data, h, [&](const std::string&, const std::string&) { ++models; });
  EXPECT_EQ(models, 3);
  ASSERT_EQ(hv.points.size(), 2u);
  EXPECT_EQ(hv.points[0].at, (Month{2010, 5}));
  EXPECT_EQ(hv.points[1].at, (Month{2010, 6}));

  Word2VecTimelineConfig w;
  w.window_months = 4;
  const auto wv = word2vec_timeline(data, w);
  expect_well_formed(wv);
  EXPECT_EQ(wv.points.size(), 2u);

  h.window_months = 6;
  w.window_months = 6;
  EXPECT_THROW(hmm2vec_timeline(data, h), InsufficientDataError);
  EXPECT_THROW(word2vec_timeline(data, w), InsufficientDataError);
}

Timeline series(const std::vector<double>& values) {
  Timeline t{"f", Method::kHmm2, {}, {}};
  for (std::size_t i = 0; i < values.size(); ++i) t.points.push_back({Month{2000, 1} + static_cast<int>(i), values[i]});
  return t;
}

TEST(DetectSpikes, SingleOutlierAndConstantSeries) {
  const auto r = detect_spikes(series({1, 1, 1, 1, 10}), 2.0);
  ASSERT_EQ(r.spikes.size(), 1u);
  EXPECT_EQ(r.spikes[0].at, (Month{2000, 5}));
  EXPECT_TRUE(detect_spikes(series({3, 3, 3, 3, 3})).spikes.empty());
  EXPECT_THROW(detect_spikes(series({1, 2, 3})), InsufficientDataError);
}

TEST(DetectSpikes, SortedByZScore) {
  const auto r = detect_spikes(series({1, 1.1, 0.9, 7, 1, 12, 1.05, 0.95}), 2.0);
  ASSERT_EQ(r.spikes.size(), 2u);
  EXPECT_EQ(r.spikes[0].value, 12);
  EXPECT_EQ(r.spikes[1].value, 7);
  EXPECT_GT(r.spikes[0].z_score, r.spikes[1].z_score);
}

TEST(DetectSpikes, AffineInvariance) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(30), w(30);
    for (auto& x : v) x = d(rng);
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = 4.5 * v[i] - 17.0;
    std::set<Month> a, b;
    for (const auto& s : detect_spikes(series(v)).spikes) a.insert(s.at);
    for (const auto& s : detect_spikes(series(w)).spikes) b.insert(s.at);
    EXPECT_EQ(a, b);
  }
}

TEST(DetectSpikes, GaussianFalsePositiveRate) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::size_t flagged = 0;
  for (int s = 0; s < 100; ++s) {
    std::vector<double> v(1000);
    for (auto& x : v) x = g(rng);
    flagged += detect_spikes(series(v), 3.0).spikes.size();
  }
  EXPECT_LE(static_cast<double>(flagged) / 100000.0, 0.01);
}

TEST(RobustSigma, MadAndFallback) {
  EXPECT_NEAR(robust_sigma(std::vector<double>{1, 2, 3, 4, 100}), 1.4826, 1e-12);
  // MAD is zero; mean absolute deviation from the median is 9/5.
  EXPECT_NEAR(robust_sigma(std::vector<double>{1, 1, 1, 1, 10}), 1.2533 * 9.0 / 5.0, 1e-12);
  EXPECT_EQ(robust_sigma(std::vector<double>{2, 2, 2}), 0.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
}

TEST(FirstDifferences, AbsoluteChangesAtLaterPoint) {
  const auto d = first_differences(series({1.0, 3.0, 2.5}));
  ASSERT_EQ(d.points.size(), 2u);
  EXPECT_EQ(d.points[0].at, (Month{2000, 2}));
  EXPECT_DOUBLE_EQ(d.points[0].value, 2.0);
  EXPECT_DOUBLE_EQ(d.points[1].value, 0.5);
}

TEST(Localization, SpikeMatching) {
  const std::vector<Month> truth{{2011, 1}};
  SpikeReport exact{{{Month{2011, 1}, 5.0, 4.0}}, 2.0};
  EXPECT_TRUE(localize_spikes(exact, truth, 1).pass);
  SpikeReport off{{{Month{2011, 3}, 5.0, 4.0}}, 2.0};
  EXPECT_FALSE(localize_spikes(off, truth, 1).pass);
  EXPECT_TRUE(localize_spikes(off, truth, 2).pass);
  EXPECT_FALSE(localize_spikes(SpikeReport{}, truth, 1).pass);
  EXPECT_TRUE(localize_spikes(SpikeReport{}, {}, 1).pass);
  EXPECT_FALSE(localize_spikes(exact, {}, 1).pass);
  // Only the strongest spike is considered for one boundary.
  SpikeReport two{{{Month{2012, 6}, 9.0, 6.0}, {Month{2011, 1}, 5.0, 4.0}}, 2.0};
  EXPECT_FALSE(localize_spikes(two, truth, 1).pass);
  EXPECT_TRUE(localize_month(Month{2010, 12}, truth, 1).pass);
  EXPECT_FALSE(localize_month(std::nullopt, truth, 1).pass);
}

TEST(TwoPhase, SpikingWindowIsRefinedOnItsOwnMonths) {
  const auto data = small_family(10, {6}, 1.0, 11, 6);
  TwoPhaseConfig cfg;
  cfg.coarse = CoarseMethod::kHmm2Vec;
  cfg.hmm.window_months = 3;
  cfg.spike_k = 0.5;
  const auto report = two_phase(data, cfg);
  ASSERT_EQ(report.refinements.size(), report.spikes.spikes.size());
  for (const auto& r : report.refinements) {
    EXPECT_EQ(r.window.end, r.coarse.at);
    EXPECT_EQ(r.window.months(), 3);
    for (const auto& p : r.refined.points) EXPECT_TRUE(r.window.contains(p.at) && r.window.contains(p.at - 1));
  }
}

TEST(TwoPhase, DrillDownOnPrecomputedCoarseMatches) {
  const auto data = small_family(10, {6}, 1.0, 11, 6);
  TwoPhaseConfig cfg;
  cfg.coarse = CoarseMethod::kWord2Vec;
  cfg.w2v.window_months = 3;
  cfg.spike_k = 0.5;
  const auto full = two_phase(data, cfg);
  const auto reused = drill_down(data, word2vec_timeline(data, cfg.w2v), cfg);
  EXPECT_EQ(drilldown_to_json(reused), drilldown_to_json(full));
}

TEST(TwoPhase, StationaryFlatCoarseTimelineSkipsPhaseTwo) {
  const auto data = identical_samples(8, 3);
  TwoPhaseConfig cfg;
  cfg.coarse = CoarseMethod::kHmm2Vec;
  cfg.hmm.window_months = 3;
  cfg.hmm.per_window_seed = false;
  const auto report = two_phase(data, cfg);
  EXPECT_TRUE(report.phase2_skipped());
  EXPECT_TRUE(report.refinements.empty());
}

TEST(ReportIo, TimelineCsvRoundTrip) {
  auto t = series({0.5, 1.0 / 3.0, 2e-17});
  t.family = "fam, with comma";
  t.method = Method::kW2v;
  const auto csv = timeline_to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "family,method,label,value");
  const auto back = timelines_from_csv(csv);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].family, t.family);
  EXPECT_EQ(back[0].method, Method::kW2v);
  ASSERT_EQ(back[0].points.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[0].points[i].at, t.points[i].at);
    EXPECT_EQ(back[0].points[i].value, t.points[i].value);
  }
  EXPECT_THROW(timelines_from_csv("family,method,label,value\nf,HMM2,2000-02,1\nf,HMM2,2000-01,1\n"), InputError);
  EXPECT_THROW(timelines_from_csv("a,b\n"), InputError);
}

TEST(ReportIo, SpikeJsonRoundTrip) {
  const auto r = detect_spikes(series({1, 1, 1, 1, 10}), 2.0);
  const auto back = spikes_from_json(spikes_to_json(r));
  ASSERT_EQ(back.spikes.size(), 1u);
  EXPECT_EQ(back.spikes[0].at, r.spikes[0].at);
  EXPECT_EQ(back.spikes[0].z_score, r.spikes[0].z_score);
  EXPECT_THROW(spikes_from_json("{\"not\": \"array\"}"), InputError);
}

TEST(ReportIo, DrillDownRefinedMonths) {
  DrillDownReport report;
  report.family = "f";
  report.coarse = series({1, 1, 1, 1, 10});
  report.spikes = detect_spikes(report.coarse);
  Refinement r{report.spikes.spikes[0], corpus::make_window({2000, 3}, 3), series({0.1, 0.7}), std::nullopt};
  r.peak = r.refined.points[1];
  report.refinements.push_back(r);
  const auto months = refined_months_from_json(drilldown_to_json(report));
  EXPECT_EQ(months, std::vector<Month>{Month(2000, 2)});
}

}  // namespace
}  // namespace opdrift::detectors
