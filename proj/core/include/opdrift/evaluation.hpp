#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opdrift/detectors.hpp"

namespace opdrift::detectors {

// |v_i - v_{i-1}| between consecutive points with no gap in between, placed
// at the later point. HMM approach 1 is localized on this series.
Timeline first_differences(const Timeline& timeline);

// Month of the largest value; nullopt for an empty timeline.
std::optional<Month> argmax_month(const Timeline& timeline);

bool within_tolerance(Month detected, Month truth, int tolerance) noexcept;

struct LocalizationResult {
  bool pass = false;
  std::vector<Month> detected;  // the candidate months that were matched against truth
  std::string detail;
};

// The top |truth| spikes must cover every boundary within +-tolerance months.
// No spikes with nonempty truth is a failure; empty truth passes only when
// there are no spikes.
LocalizationResult localize_spikes(const SpikeReport& report, std::span<const Month> truth, int tolerance);

// Single-candidate form used when a method yields exactly one detected month.
LocalizationResult localize_month(std::optional<Month> detected, std::span<const Month> truth, int tolerance);

}  // namespace opdrift::detectors
