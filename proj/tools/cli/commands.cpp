#include "cli/commands.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "json.hpp"

#include "opdrift/corpus.hpp"
#include "opdrift/error.hpp"
#include "opdrift/evaluation.hpp"
#include "opdrift/report_io.hpp"
#include "opdrift/synthgen.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Samples grouped by family name, families in lexicographic order.
std::map<std::string, corpus::Dataset> by_family(const corpus::Dataset& samples) {
  std::map<std::string, corpus::Dataset> out;
  for (const auto& s : samples) out[s.family].push_back(s);
  return out;
}

std::string month_span(const corpus::Dataset& samples) {
  Month lo = samples.front().month();
  Month hi = lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.month());
    hi = std::max(hi, s.month());
  }
  return lo.label() + ".." + hi.label();
}

detectors::Timeline run_pipeline(RunMethod m, const detectors::FamilyData& data, const RunConfig& config,
                                 const detectors::ModelSink& sink) {
  switch (m) {
    case RunMethod::kLr: return detectors::lr_timeline(data, config.lr, sink);
    case RunMethod::kHmm1: return detectors::hmm_approach1(data, config.hmm_config(), sink);
    case RunMethod::kHmm2: return detectors::hmm_approach2(data, config.hmm_config(), sink);
    case RunMethod::kHmm2Vec: return detectors::hmm2vec_timeline(data, config.hmm_config(), sink);
    case RunMethod::kW2v: return detectors::word2vec_timeline(data, config.w2v_config(), sink);
    case RunMethod::kTwoPhase: break;
  }
  throw InputError("two-phase is not a single timeline");
}

ordered_json months_json(const std::vector<Month>& months) {
  auto arr = ordered_json::array();
  for (auto m : months) arr.push_back(m.label());
  return arr;
}

std::string join_labels(const std::vector<Month>& months) {
  if (months.empty()) return "-";
  std::string s;
  for (auto m : months) {
    if (!s.empty()) s += ',';
    s += m.label();
  }
  return s;
}

}  // namespace

void cmd_ingest(const fs::path& manifest, bool lenient, std::ostream& out) {
  const auto load = corpus::load_manifest(manifest, {lenient});
  if (load.samples.empty()) throw InsufficientDataError("manifest lists no usable samples");
  out << "family,samples,months,first,last\n";
  for (const auto& [family, samples] : by_family(load.samples)) {
    std::map<Month, int> months;
    for (const auto& s : samples) ++months[s.month()];
    out << csv_field(family) << ',' << samples.size() << ',' << months.size() << ','
        << months.begin()->first.label() << ',' << months.rbegin()->first.label() << '\n';
  }
  for (const auto& d : load.diagnostics) out << "skipped: " << d << '\n';
}

void cmd_run(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.manifest.empty()) throw InputError("--manifest is required");
  if (config.out_dir.empty()) throw InputError("--out is required");

  const auto load = corpus::load_manifest(config.manifest, {config.lenient});
  if (load.samples.empty()) throw InsufficientDataError("manifest lists no usable samples");
  const fs::path root(config.out_dir);

  ordered_json meta;
  meta["tool"] = "opdrift";
  meta["version"] = kToolVersion;
  meta["manifest"] = config.manifest;
  meta["seed"] = config.seed;
  {
    auto methods = ordered_json::array();
    for (auto m : config.methods) methods.push_back(run_method_name(m));
    meta["methods"] = methods;
  }
  meta["config"] = config.settings();
  meta["manifest_diagnostics"] = load.diagnostics;
  auto families = ordered_json::array();
  std::vector<std::string> notes;

  for (const auto& [family, samples] : by_family(load.samples)) {
    const auto data = detectors::prepare_family(family, samples, config.top_k);
    ordered_json fam;
    fam["family"] = family;
    fam["samples"] = samples.size();
    fam["vocab_size"] = data.vocab_size();
    fam["span"] = month_span(samples);

    // A coarse timeline computed by its own pipeline in this run is reused by
    // the drill-down instead of being trained again.
    std::optional<detectors::Timeline> w2v_timeline, hmm2vec_timeline;
    auto methods = config.methods;
    std::stable_partition(methods.begin(), methods.end(), [](RunMethod m) { return m != RunMethod::kTwoPhase; });
    for (auto m : methods) {
      const fs::path dir = root / family / std::string(run_method_name(m));
      if (m == RunMethod::kTwoPhase) {
        const auto tp = config.two_phase_config();
        const auto& cached = tp.coarse == detectors::CoarseMethod::kWord2Vec ? w2v_timeline : hmm2vec_timeline;
        const auto report = cached ? detectors::drill_down(data, *cached, tp) : detectors::two_phase(data, tp);
        write_file_atomic(dir / "drilldown.json", detectors::drilldown_to_json(report));
        out << family << " two-phase: " << report.spikes.spikes.size() << " coarse spike(s)\n";
        continue;
      }
      const detectors::ModelSink sink = [&dir](const std::string& name, const std::string& text) {
        write_file_atomic(dir / "models" / name, text);
      };
      const auto timeline = run_pipeline(m, data, config, sink);
      if (m == RunMethod::kW2v) w2v_timeline = timeline;
      if (m == RunMethod::kHmm2Vec) hmm2vec_timeline = timeline;
      write_file_atomic(dir / "timeline.csv", detectors::timeline_to_csv(timeline));
      if (timeline.points.size() >= 4) {
        const auto spikes = detectors::detect_spikes(timeline, config.spike_k);
        write_file_atomic(dir / "spikes.json", detectors::spikes_to_json(spikes));
      } else {
        notes.push_back(family + "/" + std::string(run_method_name(m)) + ": " +
                        std::to_string(timeline.points.size()) + " point(s), spike detection skipped");
      }
      out << family << ' ' << run_method_name(m) << ": " << timeline.points.size() << " point(s)\n";
    }
    families.push_back(std::move(fam));
  }
  meta["families"] = std::move(families);
  meta["notes"] = notes;
  write_file_atomic(root / "run.json", meta.dump(2) + "\n");
  for (const auto& n : notes) out << "note: " << n << '\n';
}

void cmd_synth(const fs::path& spec, const fs::path& out_dir, std::optional<std::uint64_t> seed_override,
               std::ostream& out) {
  auto cfg = synthgen::FixtureConfig::parse(read_text_file(spec));
  if (seed_override) cfg.seed = *seed_override;
  const auto family = synthgen::generate_family(synthgen::make_family_spec(cfg));
  synthgen::write_family(family, out_dir);
  write_file_atomic(out_dir / "fixture.cfg", cfg.to_text());
  out << "wrote " << family.samples.size() << " samples of family " << cfg.family << " to " << out_dir.string()
      << '\n';
}

int EvalSummary::passed() const {
  return static_cast<int>(std::count_if(lines.begin(), lines.end(), [](const EvalLine& l) { return l.pass; }));
}

EvalSummary evaluate_outputs(const fs::path& timelines, const fs::path& truth_path, int tolerance,
                             double spike_k) {
  if (tolerance < 0) throw InputError("--tolerance must be >= 0");
  if (!fs::is_directory(timelines)) throw InputError("not a directory: " + timelines.string());
  std::map<std::string, std::vector<Month>> truth;
  for (const auto& [family, month] : synthgen::truth_from_csv(read_text_file(truth_path))) {
    truth[family].push_back(month);
  }

  EvalSummary summary;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(timelines)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename();
    if (name == "timeline.csv" || name == "drilldown.json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    const std::string text = read_text_file(file);
    if (file.filename() == "drilldown.json") {
      EvalLine line;
      line.method = "two-phase";
      line.family = file.parent_path().parent_path().filename().string();
      line.truth = truth[line.family];
      auto refined = detectors::refined_months_from_json(text);
      if (refined.size() > std::max<std::size_t>(line.truth.size(), 1)) {
        refined.resize(std::max<std::size_t>(line.truth.size(), 1));
      }
      auto result = detectors::localize_month(std::nullopt, line.truth, tolerance);
      if (!refined.empty()) {
        detectors::SpikeReport as_spikes;
        for (auto m : refined) as_spikes.spikes.push_back({m, 0.0, 0.0});
        result = detectors::localize_spikes(as_spikes, line.truth, tolerance);
      }
      line.pass = result.pass;
      line.detected = result.detected;
      line.detail = result.detail;
      summary.lines.push_back(std::move(line));
      continue;
    }
    for (const auto& tl : detectors::timelines_from_csv(text)) {
      EvalLine line;
      line.family = tl.family;
      line.method = file.parent_path().filename().string();
      line.truth = truth[tl.family];
      detectors::LocalizationResult result;
      if (tl.method == detectors::Method::kHmm1) {
        result = detectors::localize_month(detectors::argmax_month(detectors::first_differences(tl)), line.truth,
                                           tolerance);
      } else if (tl.points.size() < 4) {
        result = detectors::localize_month(std::nullopt, line.truth, tolerance);
        result.detail = "fewer than 4 points; " + result.detail;
      } else {
        result = detectors::localize_spikes(detectors::detect_spikes(tl, spike_k), line.truth, tolerance);
      }
      line.pass = result.pass;
      line.detected = result.detected;
      line.detail = result.detail;
      summary.lines.push_back(std::move(line));
    }
  }
  std::stable_sort(summary.lines.begin(), summary.lines.end(), [](const EvalLine& a, const EvalLine& b) {
    return std::tie(a.family, a.method) < std::tie(b.family, b.method);
  });
  return summary;
}

void cmd_eval(const fs::path& timelines, const fs::path& truth, int tolerance, double spike_k,
              const std::optional<fs::path>& json_out, std::ostream& out) {
  const auto summary = evaluate_outputs(timelines, truth, tolerance, spike_k);
  if (summary.lines.empty()) throw InputError("no timeline.csv or drilldown.json below " + timelines.string());
  for (const auto& l : summary.lines) {
    out << (l.pass ? "PASS " : "FAIL ") << l.family << ' ' << l.method << " detected=" << join_labels(l.detected)
        << " truth=" << join_labels(l.truth) << '\n';
  }
  out << "summary: " << summary.passed() << '/' << summary.lines.size() << " passed (tolerance " << tolerance
      << ")\n";
  if (json_out) {
    ordered_json j;
    j["tolerance"] = tolerance;
    j["passed"] = summary.passed();
    j["total"] = summary.lines.size();
    auto arr = ordered_json::array();
    for (const auto& l : summary.lines) {
      arr.push_back({{"family", l.family},
                     {"method", l.method},
                     {"pass", l.pass},
                     {"detected", months_json(l.detected)},
                     {"truth", months_json(l.truth)},
                     {"detail", l.detail}});
    }
    j["results"] = std::move(arr);
    write_file_atomic(*json_out, j.dump(2) + "\n");
  }
}

}  // namespace opdrift::cli
