#include "cli/app.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "opdrift/error.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::cli {

namespace {

std::pair<std::string, std::string> split_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
  return {std::string(trim(std::string_view(kv).substr(0, eq))), std::string(trim(std::string_view(kv).substr(eq + 1)))};
}

std::string keys_help() {
  std::string s = "Config keys (for --config files and --set):";
  for (const auto& k : run_config_keys()) s += "\n  " + k;
  return s;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"opdrift: concept-drift timelines for opcode-sequence families"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // ingest
  std::string ingest_manifest;
  bool ingest_lenient = false;
  auto* ingest = app.add_subcommand("ingest", "Summarize a manifest: samples and month span per family");
  ingest->add_option("--manifest", ingest_manifest, "Manifest CSV (path,family,date)")->required();
  ingest->add_flag("--lenient", ingest_lenient, "Skip malformed rows instead of failing");

  // run
  std::string run_manifest, run_out, run_methods, run_config_file;
  std::optional<std::uint64_t> run_seed;
  std::optional<int> run_states, run_top_k;
  std::vector<std::string> run_sets;
  bool run_lenient = false, run_normalize = false;
  auto* run = app.add_subcommand("run", "Build drift timelines, spikes and models for every family");
  run->add_option("--manifest", run_manifest, "Manifest CSV")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--methods", run_methods, "Comma list of lr|hmm1|hmm2|hmm2vec|w2v|two-phase (default hmm2,w2v)");
  run->add_option("--seed", run_seed, "Master seed");
  run->add_option("--config", run_config_file, "key=value config file; flags override it")->check(CLI::ExistingFile);
  run->add_option("--set", run_sets, "Override one config key (key=value); repeatable");
  run->add_option("--n-states", run_states, "Hidden states N");
  run->add_option("--top-k", run_top_k, "Vocabulary size before OTHER");
  run->add_flag("--normalize-scorevec", run_normalize, "Divide approach-2 distances by sqrt(test length)");
  run->add_flag("--lenient", run_lenient, "Skip malformed manifest rows");
  run->footer(keys_help());

  // synth
  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic family with known era boundaries");
  synth->add_option("--spec", synth_spec, "Fixture key=value file")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the fixture seed");

  // eval
  std::string eval_timelines, eval_truth, eval_json;
  int eval_tolerance = 1;
  double eval_spike_k = 2.0;
  auto* eval = app.add_subcommand("eval", "Score run outputs against ground-truth boundaries");
  eval->add_option("--timelines", eval_timelines, "Directory written by `opdrift run`")->required();
  eval->add_option("--truth", eval_truth, "CSV with header family,boundary")->required()->check(CLI::ExistingFile);
  eval->add_option("--tolerance", eval_tolerance, "Allowed offset in windows")->capture_default_str();
  eval->add_option("--spike-k", eval_spike_k, "Spike threshold multiplier")->capture_default_str();
  eval->add_option("--json", eval_json, "Also write the results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kBadInput);
  }

  try {
    if (*ingest) {
      cmd_ingest(ingest_manifest, ingest_lenient, std::cout);
    } else if (*run) {
      RunConfig config;
      if (!run_config_file.empty()) config.apply(parse_key_values(read_text_file(run_config_file)));
      for (const auto& kv : run_sets) {
        const auto [key, value] = split_assignment(kv);
        config.set(key, value);
      }
      if (!run_methods.empty()) config.methods = parse_method_list(run_methods);
      if (config.methods.empty()) config.methods = {RunMethod::kHmm2, RunMethod::kW2v};
      if (run_seed) config.seed = *run_seed;
      if (run_states) config.hmm.hmm.n_states = *run_states;
      if (run_top_k) config.top_k = *run_top_k;
      if (run_normalize) config.hmm.normalize_scorevec = true;
      if (run_lenient) config.lenient = true;
      config.manifest = run_manifest;
      config.out_dir = run_out;
      cmd_run(config, std::cout);
    } else if (*synth) {
      cmd_synth(synth_spec, synth_out, synth_seed, std::cout);
    } else if (*eval) {
      std::optional<std::filesystem::path> json;
      if (!eval_json.empty()) json = eval_json;
      cmd_eval(eval_timelines, eval_truth, eval_tolerance, eval_spike_k, json, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "opdrift: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "opdrift: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kBadInput);
  } catch (const std::exception& e) {
    std::cerr << "opdrift: internal failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kNumericFailure);
  }
  return 0;
}

}  // namespace opdrift::cli
