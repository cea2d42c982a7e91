#include "opdrift/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <utility>

#include "opdrift/error.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::corpus {

std::vector<std::string> parse_opcode_file(std::string_view text) {
  std::vector<std::string> tokens;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    line = trim(line);
    if (line.empty() || line.front() == ';' || line.front() == '#') continue;

    auto end = line.find_first_of(" \t\r\v\f");
    std::string token(line.substr(0, end));
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    tokens.push_back(std::move(token));
  }
  if (tokens.empty()) throw InputError("opcode file contains no instructions");
  return tokens;
}

ManifestLoad load_manifest(const std::filesystem::path& manifest, ManifestOptions options) {
  const std::string text = read_text_file(manifest);
  const auto base = manifest.parent_path();

  ManifestLoad result;
  std::string_view rest = text;
  int line_no = 0;
  bool header_seen = false;
  int path_col = -1;
  int family_col = -1;
  int date_col = -1;

  auto fail = [&](const std::string& message) {
    std::string diag = manifest.string() + ":" + std::to_string(line_no) + ": " + message;
    if (!options.lenient) throw InputError(diag);
    result.diagnostics.push_back(std::move(diag));
  };

  while (!rest.empty()) {
    auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;

    auto fields = split_csv_row(line);
    for (auto& f : fields) f = std::string(trim(f));

    if (!header_seen) {
      for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
        if (fields[i] == "path") path_col = i;
        if (fields[i] == "family") family_col = i;
        if (fields[i] == "date") date_col = i;
      }
      if (path_col < 0 || family_col < 0 || date_col < 0) {
        throw InputError(manifest.string() + ": header must contain path,family,date");
      }
      header_seen = true;
      continue;
    }

    const int need = std::max({path_col, family_col, date_col}) + 1;
    if (static_cast<int>(fields.size()) < need) {
      fail("expected " + std::to_string(need) + " fields, got " + std::to_string(fields.size()));
      continue;
    }

    Sample sample;
    const std::filesystem::path rel = fields[static_cast<std::size_t>(path_col)];
    sample.id = rel.stem().string();
    sample.family = fields[static_cast<std::size_t>(family_col)];
    try {
      sample.date = parse_date(fields[static_cast<std::size_t>(date_col)]);
      sample.opcodes = parse_opcode_file(read_text_file(base / rel));
    } catch (const InputError& e) {
      fail(rel.string() + ": " + e.what());
      continue;
    }
    result.samples.push_back(std::move(sample));
  }
  if (!header_seen) throw InputError(manifest.string() + ": empty manifest");

  std::stable_sort(result.samples.begin(), result.samples.end(),
                   [](const Sample& a, const Sample& b) { return a.date < b.date; });
  return result;
}

std::string format_manifest(std::span<const Sample> samples, std::span<const std::string> paths) {
  if (samples.size() != paths.size()) throw InputError("format_manifest: samples/paths size mismatch");
  std::string out = "path,family,date\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out += csv_field(paths[i]);
    out += ',';
    out += csv_field(samples[i].family);
    out += ',';
    out += format_date(samples[i].date);
    out += '\n';
  }
  return out;
}

// --- Vocabulary ----------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> top) : tokens_(std::move(top)) {
  tokens_.emplace_back(kOther);
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(tokens_[static_cast<std::size_t>(i)], i).second) {
      throw InputError("duplicate vocabulary token '" + tokens_[static_cast<std::size_t>(i)] + "'");
    }
  }
}

int Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? other_index() : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.contains(std::string(token)); }

std::string Vocabulary::to_text() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::vector<std::string> tokens;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty()) tokens.emplace_back(line);
  }
  if (tokens.empty() || tokens.back() != kOther) throw InputError("vocabulary must end with " + std::string(kOther));
  tokens.pop_back();
  return Vocabulary(std::move(tokens));
}

Vocabulary build_vocabulary(std::span<const Sample> samples, int top_k) {
  if (samples.empty()) throw InputError("build_vocabulary: no samples");
  if (top_k < 1) throw InputError("build_vocabulary: top_k must be >= 1");

  std::unordered_map<std::string, long long> counts;
  for (const auto& s : samples) {
    for (const auto& op : s.opcodes) ++counts[op];
  }
  counts.erase(std::string(Vocabulary::kOther));

  std::vector<std::pair<std::string, long long>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (static_cast<int>(ranked.size()) > top_k) ranked.resize(static_cast<std::size_t>(top_k));

  std::vector<std::string> top;
  top.reserve(ranked.size());
  for (auto& [token, count] : ranked) top.push_back(std::move(token));
  return Vocabulary(std::move(top));
}

EncodedSample encode(const Sample& sample, const Vocabulary& vocab) {
  EncodedSample out{sample.id, sample.month(), {}};
  out.indices.reserve(sample.opcodes.size());
  for (const auto& op : sample.opcodes) out.indices.push_back(vocab.index_of(op));
  return out;
}

std::vector<EncodedSample> encode_all(std::span<const Sample> samples, const Vocabulary& vocab) {
  std::vector<EncodedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(encode(s, vocab));
  return out;
}

std::vector<std::span<const int>> sequences_of(std::span<const EncodedSample> samples) {
  std::vector<std::span<const int>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.emplace_back(s.indices);
  return out;
}

MonthlyBuckets monthly_buckets(std::span<const EncodedSample> samples) {
  MonthlyBuckets buckets;
  if (samples.empty()) throw InputError("monthly_buckets: empty dataset");
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                      [](const auto& a, const auto& b) { return a.month < b.month; });
  for (Month m = lo->month; m <= hi->month; m = m + 1) buckets[m];
  for (const auto& s : samples) buckets[s.month].push_back(s);
  return buckets;
}

TimeWindow make_window(Month start, int window_months) {
  Month end = start + (window_months - 1);
  return TimeWindow{start, end, end.label()};
}

std::vector<WindowSamples> sliding_windows(std::span<const EncodedSample> samples, int window_months,
                                           int slide_months) {
  if (window_months < 1 || slide_months < 1) throw InputError("sliding_windows: window and slide must be >= 1");
  if (samples.empty()) throw InsufficientDataError("sliding_windows: empty dataset");

  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                      [](const auto& a, const auto& b) { return a.month < b.month; });
  const Month first = lo->month;
  const Month last = hi->month;
  const int span = last - first + 1;
  if (span < window_months) {
    throw InsufficientDataError("sliding_windows: data spans " + std::to_string(span) + " months, need at least " +
                                std::to_string(window_months));
  }

  std::vector<WindowSamples> windows;
  for (Month start = first; start + (window_months - 1) <= last; start = start + slide_months) {
    WindowSamples w{make_window(start, window_months), {}};
    for (const auto& s : samples) {
      if (w.window.contains(s.month)) w.samples.push_back(s);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace opdrift::corpus
