#include "opdrift/report_io.hpp"

#include <charconv>
#include <map>

#include "json.hpp"
#include "opdrift/error.hpp"
#include "opdrift/text_io.hpp"

namespace opdrift::detectors {

using nlohmann::json;

std::string timeline_to_csv(const Timeline& timeline) {
  std::string out = "family,method,label,value\n";
  const std::string family = csv_field(timeline.family);
  const std::string method(method_name(timeline.method));
  for (const auto& p : timeline.points) {
    out += family;
    out += ',';
    out += method;
    out += ',';
    out += p.label();
    out += ',';
    out += format_double(p.value);
    out += '\n';
  }
  return out;
}

std::vector<Timeline> timelines_from_csv(std::string_view text) {
  std::vector<Timeline> out;
  std::map<std::pair<std::string, Method>, std::size_t> index;
  bool header = true;
  int line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    auto f = split_csv_row(line);
    if (header) {
      if (f != std::vector<std::string>{"family", "method", "label", "value"}) {
        throw InputError("timeline CSV: header must be family,method,label,value");
      }
      header = false;
      continue;
    }
    if (f.size() != 4) throw InputError("timeline CSV line " + std::to_string(line_no) + ": expected 4 fields");
    const Method method = parse_method(f[1]);
    double value = 0.0;
    auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), value);
    if (ec != std::errc{} || p != f[3].data() + f[3].size()) {
      throw InputError("timeline CSV line " + std::to_string(line_no) + ": bad value");
    }
    auto key = std::make_pair(f[0], method);
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) out.push_back(Timeline{f[0], method, {}, {}});
    auto& tl = out[it->second];
    const Month at = Month::parse(f[2]);
    if (!tl.points.empty() && !(tl.points.back().at < at)) {
      throw InputError("timeline CSV line " + std::to_string(line_no) + ": labels must increase");
    }
    tl.points.push_back({at, value});
  }
  if (header) throw InputError("timeline CSV: missing header");
  return out;
}

std::string spikes_to_json(const SpikeReport& report) {
  json arr = json::array();
  for (const auto& s : report.spikes) {
    arr.push_back({{"label", s.at.label()}, {"value", s.value}, {"z_score", s.z_score}});
  }
  return arr.dump(2) + "\n";
}

SpikeReport spikes_from_json(std::string_view text) {
  SpikeReport report;
  try {
    const json arr = json::parse(text);
    if (!arr.is_array()) throw InputError("spike JSON: expected an array");
    for (const auto& item : arr) {
      report.spikes.push_back({Month::parse(item.at("label").get<std::string>()), item.at("value").get<double>(),
                               item.at("z_score").get<double>()});
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("spike JSON: ") + e.what());
  }
  return report;
}

std::string drilldown_to_json(const DrillDownReport& report) {
  json doc;
  doc["family"] = report.family;
  doc["coarse_method"] = std::string(method_name(report.coarse.method));
  doc["threshold_k"] = report.spikes.threshold_k;
  doc["phase2_skipped"] = report.phase2_skipped();
  if (report.phase2_skipped()) doc["note"] = "no phase-1 spikes; phase 2 skipped";
  json refinements = json::array();
  for (const auto& r : report.refinements) {
    json item;
    item["coarse"] = {{"label", r.coarse.at.label()}, {"value", r.coarse.value}, {"z_score", r.coarse.z_score}};
    item["window"] = {{"start", r.window.start.label()}, {"end", r.window.end.label()}};
    json points = json::array();
    for (const auto& p : r.refined.points) points.push_back({{"label", p.label()}, {"value", p.value}});
    item["refined_timeline"] = std::move(points);
    if (r.peak) {
      item["refined_month"] = r.peak->label();
      item["refined_value"] = r.peak->value;
    } else {
      item["refined_month"] = nullptr;
    }
    refinements.push_back(std::move(item));
  }
  doc["refinements"] = std::move(refinements);
  return doc.dump(2) + "\n";
}

std::vector<Month> refined_months_from_json(std::string_view text) {
  std::vector<Month> out;
  try {
    const json doc = json::parse(text);
    for (const auto& r : doc.at("refinements")) {
      const auto& m = r.at("refined_month");
      if (!m.is_null()) out.push_back(Month::parse(m.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("drill-down JSON: ") + e.what());
  }
  return out;
}

}  // namespace opdrift::detectors
