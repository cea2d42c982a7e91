#include "cli/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

#include "opdrift/error.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::cli {

namespace {

int to_int(const std::string& key, const std::string& value) {
  int v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw InputError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("config key '" + key + "': expected a number, got '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw InputError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw InputError("config key '" + key + "': expected an unsigned integer, got '" + value + "'");
  }
  return v;
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Key int_key(const char* name, T RunConfig::*group, int T::*field) {
  return {name, [=](RunConfig& c, const std::string& v) { (c.*group).*field = to_int(name, v); },
          [=](const RunConfig& c) { return std::to_string((c.*group).*field); }};
}

template <typename T>
Key real_key(const char* name, T RunConfig::*group, double T::*field) {
  return {name, [=](RunConfig& c, const std::string& v) { (c.*group).*field = to_double(name, v); },
          [=](const RunConfig& c) { return format_double((c.*group).*field); }};
}

const std::vector<Key>& keys() {
  using detectors::HmmPipelineConfig;
  using detectors::LrTimelineConfig;
  using detectors::Word2VecTimelineConfig;
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"methods",
                 [](RunConfig& c, const std::string& v) { c.methods = parse_method_list(v); },
                 [](const RunConfig& c) {
                   std::string s;
                   for (auto m : c.methods) {
                     if (!s.empty()) s += ',';
                     s += run_method_name(m);
                   }
                   return s;
                 }});
    k.push_back({"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    k.push_back({"top_k", [](RunConfig& c, const std::string& v) { c.top_k = to_int("top_k", v); },
                 [](const RunConfig& c) { return std::to_string(c.top_k); }});
    k.push_back({"spike_k", [](RunConfig& c, const std::string& v) { c.spike_k = to_double("spike_k", v); },
                 [](const RunConfig& c) { return format_double(c.spike_k); }});
    k.push_back({"coarse",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "w2v") {
                     c.coarse = detectors::CoarseMethod::kWord2Vec;
                   } else if (v == "hmm2vec") {
                     c.coarse = detectors::CoarseMethod::kHmm2Vec;
                   } else {
                     throw InputError("config key 'coarse': expected w2v or hmm2vec, got '" + v + "'");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::string(c.coarse == detectors::CoarseMethod::kWord2Vec ? "w2v" : "hmm2vec");
                 }});

    // HMM pipelines (approach 1, approach 2, HMM2Vec, two-phase refinement)
    k.push_back({"n_states", [](RunConfig& c, const std::string& v) { c.hmm.hmm.n_states = to_int("n_states", v); },
                 [](const RunConfig& c) { return std::to_string(c.hmm.hmm.n_states); }});
    k.push_back({"hmm_max_iters",
                 [](RunConfig& c, const std::string& v) { c.hmm.hmm.max_iters = to_int("hmm_max_iters", v); },
                 [](const RunConfig& c) { return std::to_string(c.hmm.hmm.max_iters); }});
    k.push_back({"hmm_tol", [](RunConfig& c, const std::string& v) { c.hmm.hmm.tol = to_double("hmm_tol", v); },
                 [](const RunConfig& c) { return format_double(c.hmm.hmm.tol); }});
    k.push_back({"hmm_restarts",
                 [](RunConfig& c, const std::string& v) { c.hmm.hmm.restarts = to_int("hmm_restarts", v); },
                 [](const RunConfig& c) { return std::to_string(c.hmm.hmm.restarts); }});
    k.push_back({"hmm_prob_floor",
                 [](RunConfig& c, const std::string& v) { c.hmm.hmm.prob_floor = to_double("hmm_prob_floor", v); },
                 [](const RunConfig& c) { return format_double(c.hmm.hmm.prob_floor); }});
    k.push_back(int_key("hmm_min_samples", &RunConfig::hmm, &HmmPipelineConfig::min_samples));
    k.push_back({"aggregate",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "mean") {
                     c.hmm.aggregate = detectors::Aggregate::kMean;
                   } else if (v == "median") {
                     c.hmm.aggregate = detectors::Aggregate::kMedian;
                   } else {
                     throw InputError("config key 'aggregate': expected mean or median, got '" + v + "'");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::string(c.hmm.aggregate == detectors::Aggregate::kMean ? "mean" : "median");
                 }});
    k.push_back(real_key("train_fraction", &RunConfig::hmm, &HmmPipelineConfig::train_fraction));
    k.push_back({"normalize_scorevec",
                 [](RunConfig& c, const std::string& v) { c.hmm.normalize_scorevec = to_bool("normalize_scorevec", v); },
                 [](const RunConfig& c) { return std::string(c.hmm.normalize_scorevec ? "true" : "false"); }});
    k.push_back(int_key("hmm_window_months", &RunConfig::hmm, &HmmPipelineConfig::window_months));
    k.push_back(int_key("hmm_slide_months", &RunConfig::hmm, &HmmPipelineConfig::slide_months));
    k.push_back({"hmm_per_window_seed",
                 [](RunConfig& c, const std::string& v) { c.hmm.per_window_seed = to_bool("hmm_per_window_seed", v); },
                 [](const RunConfig& c) { return std::string(c.hmm.per_window_seed ? "true" : "false"); }});

    // Word2Vec
    k.push_back({"w2v_dim", [](RunConfig& c, const std::string& v) { c.w2v.w2v.dim = to_int("w2v_dim", v); },
                 [](const RunConfig& c) { return std::to_string(c.w2v.w2v.dim); }});
    k.push_back({"w2v_window", [](RunConfig& c, const std::string& v) { c.w2v.w2v.window = to_int("w2v_window", v); },
                 [](const RunConfig& c) { return std::to_string(c.w2v.w2v.window); }});
    k.push_back({"w2v_epochs", [](RunConfig& c, const std::string& v) { c.w2v.w2v.epochs = to_int("w2v_epochs", v); },
                 [](const RunConfig& c) { return std::to_string(c.w2v.w2v.epochs); }});
    k.push_back({"w2v_learning_rate",
                 [](RunConfig& c, const std::string& v) { c.w2v.w2v.learning_rate = to_double("w2v_learning_rate", v); },
                 [](const RunConfig& c) { return format_double(c.w2v.w2v.learning_rate); }});
    k.push_back({"w2v_min_learning_rate",
                 [](RunConfig& c, const std::string& v) {
                   c.w2v.w2v.min_learning_rate = to_double("w2v_min_learning_rate", v);
                 },
                 [](const RunConfig& c) { return format_double(c.w2v.w2v.min_learning_rate); }});
    k.push_back(int_key("w2v_min_samples", &RunConfig::w2v, &Word2VecTimelineConfig::min_samples));
    k.push_back(int_key("w2v_window_months", &RunConfig::w2v, &Word2VecTimelineConfig::window_months));
    k.push_back(int_key("w2v_slide_months", &RunConfig::w2v, &Word2VecTimelineConfig::slide_months));
    k.push_back({"w2v_per_window_seed",
                 [](RunConfig& c, const std::string& v) { c.w2v.per_window_seed = to_bool("w2v_per_window_seed", v); },
                 [](const RunConfig& c) { return std::string(c.w2v.per_window_seed ? "true" : "false"); }});

    // Logistic regression
    k.push_back({"lr_epochs", [](RunConfig& c, const std::string& v) { c.lr.train.epochs = to_int("lr_epochs", v); },
                 [](const RunConfig& c) { return std::to_string(c.lr.train.epochs); }});
    k.push_back({"lr_learning_rate",
                 [](RunConfig& c, const std::string& v) { c.lr.train.learning_rate = to_double("lr_learning_rate", v); },
                 [](const RunConfig& c) { return format_double(c.lr.train.learning_rate); }});
    k.push_back({"lr_l2", [](RunConfig& c, const std::string& v) { c.lr.train.l2 = to_double("lr_l2", v); },
                 [](const RunConfig& c) { return format_double(c.lr.train.l2); }});
    k.push_back(int_key("lr_history_months", &RunConfig::lr, &LrTimelineConfig::history_months));
    return k;
  }();
  return table;
}

}  // namespace

std::string_view run_method_name(RunMethod m) noexcept {
  switch (m) {
    case RunMethod::kLr: return "lr";
    case RunMethod::kHmm1: return "hmm1";
    case RunMethod::kHmm2: return "hmm2";
    case RunMethod::kHmm2Vec: return "hmm2vec";
    case RunMethod::kW2v: return "w2v";
    case RunMethod::kTwoPhase: return "two-phase";
  }
  return "?";
}

RunMethod parse_run_method(std::string_view name) {
  std::string lower(trim(name));
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto m : {RunMethod::kLr, RunMethod::kHmm1, RunMethod::kHmm2, RunMethod::kHmm2Vec, RunMethod::kW2v,
                 RunMethod::kTwoPhase}) {
    if (lower == run_method_name(m)) return m;
  }
  throw InputError("unknown method '" + std::string(name) + "' (expected lr|hmm1|hmm2|hmm2vec|w2v|two-phase)");
}

std::vector<RunMethod> parse_method_list(std::string_view list) {
  std::vector<RunMethod> out;
  while (!list.empty()) {
    auto comma = list.find(',');
    auto item = trim(list.substr(0, comma));
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
    if (item.empty()) continue;
    const RunMethod m = parse_run_method(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw InputError("no methods selected");
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(*this, std::string(trim(value)));
      return;
    }
  }
  throw InputError("unknown config key '" + key + "'");
}

void RunConfig::apply(const std::map<std::string, std::string>& settings) {
  for (const auto& [key, value] : settings) set(key, value);
}

void RunConfig::validate() const {
  if (methods.empty()) throw InputError("no methods selected");
  if (top_k < 1) throw InputError("top_k must be >= 1");
  if (!(spike_k > 0.0)) throw InputError("spike_k must be > 0");
  hmm.hmm.validate();
  if (hmm.min_samples < 1) throw InputError("hmm_min_samples must be >= 1");
  if (!(hmm.train_fraction > 0.0 && hmm.train_fraction < 1.0)) throw InputError("train_fraction must lie in (0, 1)");
  if (hmm.window_months < 1 || hmm.slide_months < 1) throw InputError("hmm window/slide months must be >= 1");
  w2v.w2v.validate();
  if (w2v.min_samples < 1) throw InputError("w2v_min_samples must be >= 1");
  if (w2v.window_months < 1 || w2v.slide_months < 1) throw InputError("w2v window/slide months must be >= 1");
  lr.train.validate();
  if (lr.history_months < 1) throw InputError("lr_history_months must be >= 1");
}

std::map<std::string, std::string> RunConfig::settings() const {
  std::map<std::string, std::string> out;
  for (const auto& k : keys()) out.emplace(k.name, k.get(*this));
  return out;
}

detectors::HmmPipelineConfig RunConfig::hmm_config() const {
  auto c = hmm;
  c.hmm.seed = seed;
  return c;
}

detectors::Word2VecTimelineConfig RunConfig::w2v_config() const {
  auto c = w2v;
  c.w2v.seed = seed;
  return c;
}

detectors::TwoPhaseConfig RunConfig::two_phase_config() const {
  return detectors::TwoPhaseConfig{coarse, spike_k, hmm_config(), w2v_config()};
}

std::vector<std::string> run_config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.emplace_back(k.name);
  return out;
}

}  // namespace opdrift::cli
