#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

#include "opdrift/corpus.hpp"
#include "opdrift/matrix.hpp"
#include "opdrift/month.hpp"
#include "opdrift/random.hpp"

namespace opdrift::synthgen {

// First-order Markov chain over opcode indices.
struct MarkovSource {
  int vocab_size = 0;
  Matrix transition;  // vocab_size x vocab_size, row-stochastic
  std::vector<double> initial;

  void validate(double tol = 1e-9) const;
};

// Dirichlet(concentration) rows; small concentrations give peaked rows.
std::vector<double> random_simplex(int size, double concentration, Rng& rng);
MarkovSource random_source(int vocab_size, double concentration, std::uint64_t seed);

// row' = (1 - epsilon) * row + epsilon * d with d ~ uniform on the simplex,
// independently per row (the initial distribution included). Each row moves
// by at most epsilon in total variation.
MarkovSource perturb_source(const MarkovSource& source, double epsilon, std::uint64_t seed);

struct Era {
  Month start;
  Month end;  // inclusive
  MarkovSource source;
};

struct FamilySpec {
  std::string family;
  std::vector<Era> eras;  // contiguous, non-overlapping, chronological
  int samples_per_month = 20;
  int min_length = 400;
  int max_length = 1600;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticFamily {
  corpus::Dataset samples;
  std::vector<Month> boundaries;  // first month of every era after the first
};

// Opcode tokens are named "op00", "op01", ...
std::string token_name(int index);

SyntheticFamily generate_family(const FamilySpec& spec);

// Plain-text generator parameters (key=value). Era sources are derived: the
// first from `seed`, each later one by perturbing its predecessor by epsilon.
struct FixtureConfig {
  std::string family = "synthetic";
  Month start{2010, 1};
  int months = 24;
  std::vector<int> boundaries{12};  // month offsets from `start`
  int vocab_size = 31;
  int samples_per_month = 20;
  int min_length = 400;
  int max_length = 1600;
  double epsilon = 0.3;
  double concentration = 0.1;
  std::uint64_t seed = 1;

  std::string to_text() const;
  static FixtureConfig parse(std::string_view text);
};

FamilySpec make_family_spec(const FixtureConfig& config);

// Writes <out>/samples/<id>.ops, <out>/manifest.csv and <out>/truth.csv
// (header `family,boundary`).
void write_family(const SyntheticFamily& family, const std::filesystem::path& out_dir);

std::string truth_to_csv(std::string_view family, std::span<const Month> boundaries);
// Boundaries per family, in file order.
std::vector<std::pair<std::string, Month>> truth_from_csv(std::string_view text);

}  // namespace opdrift::synthgen
