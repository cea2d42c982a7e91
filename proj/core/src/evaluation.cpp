#include "opdrift/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace opdrift::detectors {

Timeline first_differences(const Timeline& timeline) {
  Timeline out{timeline.family, timeline.method, {}, timeline.gaps};
  for (std::size_t i = 1; i < timeline.points.size(); ++i) {
    const auto& prev = timeline.points[i - 1];
    const auto& cur = timeline.points[i];
    out.points.push_back({cur.at, std::abs(cur.value - prev.value)});
  }
  return out;
}

std::optional<Month> argmax_month(const Timeline& timeline) {
  if (timeline.points.empty()) return std::nullopt;
  auto it = std::max_element(timeline.points.begin(), timeline.points.end(),
                             [](const auto& a, const auto& b) { return a.value < b.value; });
  return it->at;
}

bool within_tolerance(Month detected, Month truth, int tolerance) noexcept {
  return std::abs(detected - truth) <= tolerance;
}

namespace {

LocalizationResult match(std::vector<Month> detected, std::span<const Month> truth, int tolerance) {
  LocalizationResult r;
  r.detected = detected;
  if (truth.empty()) {
    r.pass = detected.empty();
    r.detail = r.pass ? "no boundaries, no detections" : "detections without any boundary";
    return r;
  }
  if (detected.empty()) {
    r.detail = "no detections";
    return r;
  }
  std::vector<bool> used(detected.size(), false);
  r.pass = true;
  for (Month t : truth) {
    bool found = false;
    for (std::size_t i = 0; i < detected.size() && !found; ++i) {
      if (!used[i] && within_tolerance(detected[i], t, tolerance)) {
        used[i] = true;
        found = true;
      }
    }
    if (!found) {
      r.pass = false;
      r.detail += "missed " + t.label() + "; ";
    }
  }
  if (r.pass) r.detail = "all boundaries matched";
  return r;
}

}  // namespace

LocalizationResult localize_spikes(const SpikeReport& report, std::span<const Month> truth, int tolerance) {
  std::vector<Month> detected;
  for (const auto& s : report.spikes) {
    if (detected.size() == std::max<std::size_t>(truth.size(), 1)) break;
    detected.push_back(s.at);
  }
  if (truth.empty()) {
    detected.clear();
    for (const auto& s : report.spikes) detected.push_back(s.at);
  }
  return match(std::move(detected), truth, tolerance);
}

LocalizationResult localize_month(std::optional<Month> detected, std::span<const Month> truth, int tolerance) {
  std::vector<Month> d;
  if (detected) d.push_back(*detected);
  return match(std::move(d), truth, tolerance);
}

}  // namespace opdrift::detectors
