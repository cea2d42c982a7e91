#include "opdrift/random.hpp"

#include <string>

namespace opdrift {

std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) noexcept {
  std::string key(stream);
  key += '#';
  key += std::to_string(index);
  return master ^ stable_hash(key);
}

}  // namespace opdrift
