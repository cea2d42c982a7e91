#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cli/run_config.hpp"
#include "opdrift/month.hpp"

namespace opdrift::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Per-family sample counts and month span.
void cmd_ingest(const std::filesystem::path& manifest, bool lenient, std::ostream& out);

// Writes, under config.out_dir:
//   <family>/<method>/timeline.csv, spikes.json, models/*
//   <family>/two-phase/drilldown.json
//   run.json
void cmd_run(const RunConfig& config, std::ostream& out);

// Reads a FixtureConfig key=value file and materializes the family.
void cmd_synth(const std::filesystem::path& spec, const std::filesystem::path& out_dir,
               std::optional<std::uint64_t> seed_override, std::ostream& out);

struct EvalLine {
  std::string family;
  std::string method;  // directory name: lr, hmm1, ..., two-phase
  bool pass = false;
  std::vector<Month> detected;
  std::vector<Month> truth;
  std::string detail;
};

struct EvalSummary {
  std::vector<EvalLine> lines;  // sorted by (family, method)

  int passed() const;
};

// Scores every run output below `timelines`. HMM approach 1 is localized on
// its largest first difference, two-phase on its refined months, the others on
// their top spikes at threshold `spike_k`.
EvalSummary evaluate_outputs(const std::filesystem::path& timelines, const std::filesystem::path& truth,
                             int tolerance, double spike_k);

void cmd_eval(const std::filesystem::path& timelines, const std::filesystem::path& truth, int tolerance,
              double spike_k, const std::optional<std::filesystem::path>& json_out, std::ostream& out);

}  // namespace opdrift::cli
