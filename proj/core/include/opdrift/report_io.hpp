#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opdrift/detectors.hpp"

namespace opdrift::detectors {

// CSV with header `family,method,label,value`; labels are "YYYY-MM".
std::string timeline_to_csv(const Timeline& timeline);
// Accepts one or more timelines in a single CSV, grouped by (family, method)
// in first-appearance order.
std::vector<Timeline> timelines_from_csv(std::string_view text);

// JSON array of {label, value, z_score}.
std::string spikes_to_json(const SpikeReport& report);
SpikeReport spikes_from_json(std::string_view text);

std::string drilldown_to_json(const DrillDownReport& report);

// Refined months of a drill-down report in coarse-spike order; entries whose
// refinement produced no point are skipped.
std::vector<Month> refined_months_from_json(std::string_view text);

}  // namespace opdrift::detectors
