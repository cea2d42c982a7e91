#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "opdrift/month.hpp"

namespace opdrift::corpus {

struct Sample {
  std::string id;
  std::string family;
  Date date;
  std::vector<std::string> opcodes;  // never empty

  Month month() const noexcept { return month_of(date); }
};

using Dataset = std::vector<Sample>;

// One mnemonic per non-empty line: the first whitespace-delimited token,
// lowercased. Lines whose first non-blank character is ';' or '#' are skipped.
// Throws InputError when no token survives.
std::vector<std::string> parse_opcode_file(std::string_view text);

struct ManifestOptions {
  // Skip bad rows (recording a diagnostic) instead of failing the whole load.
  bool lenient = false;
};

struct ManifestLoad {
  Dataset samples;  // sorted by date, manifest order within a date
  std::vector<std::string> diagnostics;
};

// CSV with header `path,family,date`; paths are relative to the manifest's
// directory. Throws InputError on the first bad row unless options.lenient.
ManifestLoad load_manifest(const std::filesystem::path& manifest, ManifestOptions options = {});

// Renders a manifest for the given rows; `paths` parallels `samples`.
std::string format_manifest(std::span<const Sample> samples, std::span<const std::string> paths);

// Top-K opcode list followed by the reserved OTHER symbol (always last).
class Vocabulary {
 public:
  static constexpr std::string_view kOther = "OTHER";

  // `top` must be unique and must not contain kOther.
  explicit Vocabulary(std::vector<std::string> top);

  // M, including OTHER.
  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  int other_index() const noexcept { return size() - 1; }

  // Index of `token`, or other_index() when out of vocabulary.
  int index_of(std::string_view token) const;
  bool contains(std::string_view token) const;

  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // One token per line, OTHER included; round-trips through parse().
  std::string to_text() const;
  static Vocabulary parse(std::string_view text);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Most frequent `top_k` opcodes by occurrence count over all samples, ties
// broken lexicographically ascending. Fewer distinct tokens than top_k yields
// a smaller vocabulary.
Vocabulary build_vocabulary(std::span<const Sample> samples, int top_k);

struct EncodedSample {
  std::string sample_id;
  Month month;
  std::vector<int> indices;  // each in [0, M)
};

EncodedSample encode(const Sample& sample, const Vocabulary& vocab);
std::vector<EncodedSample> encode_all(std::span<const Sample> samples, const Vocabulary& vocab);

// Views over the index sequences, in sample order.
std::vector<std::span<const int>> sequences_of(std::span<const EncodedSample> samples);

using MonthlyBuckets = std::map<Month, std::vector<EncodedSample>>;

// One bucket per calendar month from the first to the last populated month;
// unpopulated months are present with empty lists.
MonthlyBuckets monthly_buckets(std::span<const EncodedSample> samples);

struct TimeWindow {
  Month start;
  Month end;  // inclusive
  std::string label;

  bool contains(Month m) const noexcept { return start <= m && m <= end; }
  int months() const noexcept { return end - start + 1; }
};

// Window labels are the window's final month ("YYYY-MM"), so a timeline point
// for a window lines up with the newest data it has seen.
TimeWindow make_window(Month start, int window_months);

struct WindowSamples {
  TimeWindow window;
  std::vector<EncodedSample> samples;
};

// Windows of `window_months` starting at the first populated month and
// advancing by `slide_months` while the window ends at or before the last
// populated month. Throws InsufficientDataError when the populated span is
// shorter than one window.
std::vector<WindowSamples> sliding_windows(std::span<const EncodedSample> samples,
                                           int window_months = 12, int slide_months = 1);

}  // namespace opdrift::corpus
