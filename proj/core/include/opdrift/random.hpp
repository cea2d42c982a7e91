#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace opdrift {

using Rng = std::mt19937_64;

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
std::uint64_t stable_hash(std::string_view text) noexcept;

// Per-task seed: master ^ stable_hash("<stream>#<index>"). Each method draws from
// its own stream, so enabling one method never changes another's randomness.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) noexcept;

}  // namespace opdrift
