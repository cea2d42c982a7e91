#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "opdrift/detectors.hpp"

namespace opdrift::cli {

// Pipeline selection accepted by `opdrift run --methods`.
enum class RunMethod { kLr, kHmm1, kHmm2, kHmm2Vec, kW2v, kTwoPhase };

std::string_view run_method_name(RunMethod m) noexcept;  // lr, hmm1, ..., two-phase
RunMethod parse_run_method(std::string_view name);
std::vector<RunMethod> parse_method_list(std::string_view list);

// Everything `opdrift run` needs. Built from defaults, then a key=value file,
// then command-line overrides, and echoed into run.json.
struct RunConfig {
  std::string manifest;
  std::string out_dir;
  std::vector<RunMethod> methods;
  std::uint64_t seed = 0;
  bool lenient = false;

  int top_k = 30;
  double spike_k = 2.0;
  detectors::CoarseMethod coarse = detectors::CoarseMethod::kWord2Vec;

  detectors::LrTimelineConfig lr;
  detectors::HmmPipelineConfig hmm;
  detectors::Word2VecTimelineConfig w2v;

  // Applies one key=value setting; unknown keys and out-of-range values throw
  // InputError.
  void set(const std::string& key, const std::string& value);
  void apply(const std::map<std::string, std::string>& settings);

  // Range checks across all fields.
  void validate() const;

  // Every tunable as key -> value text, in a stable order; feeding the result
  // back through apply() reproduces this config.
  std::map<std::string, std::string> settings() const;

  // Per-pipeline configs with the master seed filled in.
  detectors::HmmPipelineConfig hmm_config() const;
  detectors::Word2VecTimelineConfig w2v_config() const;
  detectors::TwoPhaseConfig two_phase_config() const;
};

// Known keys, for help text.
std::vector<std::string> run_config_keys();

}  // namespace opdrift::cli
