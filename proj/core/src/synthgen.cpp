#include "opdrift/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

#include "opdrift/error.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::synthgen {

namespace {

// Inverse-CDF sampling over precomputed cumulative rows.
class RowSampler {
 public:
  explicit RowSampler(std::span<const double> probs) : cdf_(probs.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      cdf_[i] = acc;
    }
  }

  int operator()(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, cdf_.back());
    const double x = u(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), x);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw InputError("spec key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw InputError("spec key '" + key + "': expected a number, got '" + value + "'");
  }
  return v;
}

}  // namespace

void MarkovSource::validate(double tol) const {
  const auto m = static_cast<std::size_t>(vocab_size);
  if (vocab_size < 1 || transition.rows() != m || transition.cols() != m || initial.size() != m) {
    throw InputError("Markov source shape disagrees with vocab_size");
  }
  auto check = [tol](std::span<const double> row) {
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw InputError("Markov source has a negative or NaN probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) throw InputError("Markov source row does not sum to 1");
  };
  for (std::size_t i = 0; i < m; ++i) check(transition.row(i));
  check(initial);
}

std::vector<double> random_simplex(int size, double concentration, Rng& rng) {
  if (size < 1 || !(concentration > 0.0)) throw InputError("random_simplex: bad size or concentration");
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> out(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (double& v : out) {
    v = gamma(rng);
    sum += v;
  }
  if (!(sum > 0.0)) {
    // Every draw underflowed (tiny concentration): fall back to a vertex.
    std::uniform_int_distribution<int> pick(0, size - 1);
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(pick(rng))] = 1.0;
    return out;
  }
  for (double& v : out) v /= sum;
  return out;
}

MarkovSource random_source(int vocab_size, double concentration, std::uint64_t seed) {
  if (vocab_size < 1) throw InputError("random_source: vocab_size must be >= 1");
  const auto m = static_cast<std::size_t>(vocab_size);
  Rng rng(seed);
  MarkovSource src{vocab_size, Matrix(m, m), {}};
  for (std::size_t i = 0; i < m; ++i) {
    auto row = random_simplex(vocab_size, concentration, rng);
    std::copy(row.begin(), row.end(), src.transition.row(i).begin());
  }
  src.initial = random_simplex(vocab_size, 1.0, rng);
  return src;
}

MarkovSource perturb_source(const MarkovSource& source, double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("perturb_source: epsilon must lie in [0, 1]");
  source.validate();
  Rng rng(seed);
  MarkovSource out = source;
  auto blend = [&](std::span<double> row) {
    auto d = random_simplex(static_cast<int>(row.size()), 1.0, rng);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = (1.0 - epsilon) * row[k] + epsilon * d[k];
  };
  for (std::size_t i = 0; i < out.transition.rows(); ++i) blend(out.transition.row(i));
  blend(out.initial);
  return out;
}

void FamilySpec::validate() const {
  if (eras.empty()) throw InputError("family spec needs at least one era");
  if (samples_per_month < 1) throw InputError("samples_per_month must be >= 1");
  if (min_length < 1 || max_length < min_length) throw InputError("length range must satisfy 1 <= min <= max");
  for (std::size_t k = 0; k < eras.size(); ++k) {
    if (eras[k].end < eras[k].start) throw InputError("era ends before it starts");
    if (k > 0 && eras[k].start != eras[k - 1].end + 1) throw InputError("eras must be contiguous");
    if (eras[k].source.vocab_size != eras.front().source.vocab_size) {
      throw InputError("all eras must share one vocabulary size");
    }
    eras[k].source.validate();
  }
}

std::string token_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "op%02d", index);
  return buf;
}

SyntheticFamily generate_family(const FamilySpec& spec) {
  spec.validate();
  SyntheticFamily out;
  const int m = spec.eras.front().source.vocab_size;
  std::vector<std::string> names;
  for (int i = 0; i < m; ++i) names.push_back(token_name(i));

  for (std::size_t k = 0; k < spec.eras.size(); ++k) {
    const Era& era = spec.eras[k];
    if (k > 0) out.boundaries.push_back(era.start);

    const RowSampler initial(era.source.initial);
    std::vector<RowSampler> rows;
    rows.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) rows.emplace_back(era.source.transition.row(static_cast<std::size_t>(i)));

    for (Month month = era.start; month <= era.end; month = month + 1) {
      Rng rng(derive_seed(spec.seed, "synth.month", static_cast<std::uint64_t>(month.index())));
      std::uniform_int_distribution<int> length(spec.min_length, spec.max_length);
      std::uniform_int_distribution<int> day(1, days_in_month(month));
      for (int s = 0; s < spec.samples_per_month; ++s) {
        corpus::Sample sample;
        char id[32];
        std::snprintf(id, sizeof id, "-%s-%03d", month.label().c_str(), s);
        sample.id = spec.family + id;
        sample.family = spec.family;
        const int len = length(rng);
        sample.date = Date{std::chrono::year{month.year}, std::chrono::month{static_cast<unsigned>(month.month)},
                           std::chrono::day{static_cast<unsigned>(day(rng))}};
        sample.opcodes.reserve(static_cast<std::size_t>(len));
        int state = initial(rng);
        sample.opcodes.push_back(names[static_cast<std::size_t>(state)]);
        for (int t = 1; t < len; ++t) {
          state = rows[static_cast<std::size_t>(state)](rng);
          sample.opcodes.push_back(names[static_cast<std::size_t>(state)]);
        }
        out.samples.push_back(std::move(sample));
      }
    }
  }
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const corpus::Sample& a, const corpus::Sample& b) { return a.date < b.date; });
  return out;
}

std::string FixtureConfig::to_text() const {
  std::string out;
  auto kv = [&](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  kv("family", family);
  kv("start", start.label());
  kv("months", std::to_string(months));
  std::string b;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (i) b += ',';
    b += std::to_string(boundaries[i]);
  }
  kv("boundaries", b);
  kv("vocab_size", std::to_string(vocab_size));
  kv("samples_per_month", std::to_string(samples_per_month));
  kv("min_length", std::to_string(min_length));
  kv("max_length", std::to_string(max_length));
  kv("epsilon", format_double(epsilon));
  kv("concentration", format_double(concentration));
  kv("seed", std::to_string(seed));
  return out;
}

FixtureConfig FixtureConfig::parse(std::string_view text) {
  FixtureConfig c;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "family") {
      if (value.empty()) throw InputError("spec key 'family' must not be empty");
      c.family = value;
    } else if (key == "start") {
      c.start = Month::parse(value);
    } else if (key == "months") {
      c.months = parse_int(key, value);
    } else if (key == "boundaries") {
      c.boundaries.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        auto comma = rest.find(',');
        auto item = trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        if (!item.empty()) c.boundaries.push_back(parse_int(key, std::string(item)));
      }
    } else if (key == "vocab_size") {
      c.vocab_size = parse_int(key, value);
    } else if (key == "samples_per_month") {
      c.samples_per_month = parse_int(key, value);
    } else if (key == "min_length") {
      c.min_length = parse_int(key, value);
    } else if (key == "max_length") {
      c.max_length = parse_int(key, value);
    } else if (key == "epsilon") {
      c.epsilon = parse_real(key, value);
    } else if (key == "concentration") {
      c.concentration = parse_real(key, value);
    } else if (key == "seed") {
      std::uint64_t s = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
      if (ec != std::errc{} || p != value.data() + value.size()) throw InputError("spec key 'seed': bad value");
      c.seed = s;
    } else {
      throw InputError("unknown spec key '" + key + "'");
    }
  }
  return c;
}

FamilySpec make_family_spec(const FixtureConfig& config) {
  if (config.months < 1) throw InputError("fixture months must be >= 1");
  std::vector<int> cuts = config.boundaries;
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i] <= 0 || cuts[i] >= config.months || (i > 0 && cuts[i] == cuts[i - 1])) {
      throw InputError("fixture boundaries must be distinct offsets in (0, months)");
    }
  }

  FamilySpec spec;
  spec.family = config.family;
  spec.samples_per_month = config.samples_per_month;
  spec.min_length = config.min_length;
  spec.max_length = config.max_length;
  spec.seed = config.seed;

  MarkovSource source = random_source(config.vocab_size, config.concentration, derive_seed(config.seed, "synth.source", 0));
  int era_start = 0;
  cuts.push_back(config.months);
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    if (k > 0) source = perturb_source(source, config.epsilon, derive_seed(config.seed, "synth.perturb", k));
    spec.eras.push_back(Era{config.start + era_start, config.start + (cuts[k] - 1), source});
    era_start = cuts[k];
  }
  spec.validate();
  return spec;
}

std::string truth_to_csv(std::string_view family, std::span<const Month> boundaries) {
  std::string out = "family,boundary\n";
  for (Month m : boundaries) {
    out += csv_field(family);
    out += ',';
    out += m.label();
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, Month>> truth_from_csv(std::string_view text) {
  std::vector<std::pair<std::string, Month>> out;
  bool header = true;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    auto fields = split_csv_row(line);
    if (header) {
      if (fields.size() != 2 || trim(fields[0]) != "family" || trim(fields[1]) != "boundary") {
        throw InputError("truth file: header must be family,boundary");
      }
      header = false;
      continue;
    }
    if (fields.size() != 2) throw InputError("truth file: expected 2 fields per row");
    out.emplace_back(std::string(trim(fields[0])), Month::parse(trim(fields[1])));
  }
  if (header) throw InputError("truth file: missing header");
  return out;
}

void write_family(const SyntheticFamily& family, const std::filesystem::path& out_dir) {
  std::vector<std::string> paths;
  paths.reserve(family.samples.size());
  for (const auto& s : family.samples) {
    std::string rel = "samples/" + s.id + ".ops";
    std::string body;
    for (const auto& op : s.opcodes) {
      body += op;
      body += '\n';
    }
    write_file_atomic(out_dir / rel, body);
    paths.push_back(std::move(rel));
  }
  write_file_atomic(out_dir / "manifest.csv", corpus::format_manifest(family.samples, paths));
  const std::string name = family.samples.empty() ? std::string() : family.samples.front().family;
  write_file_atomic(out_dir / "truth.csv", truth_to_csv(name, family.boundaries));
}

}  // namespace opdrift::synthgen
