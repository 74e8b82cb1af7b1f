#pragma once

#include <cstdint>
#include <string_view>

namespace scichat {

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 1469598103934665603ULL) {
  std::uint64_t hash = seed;
  for (const char ch : data) {
    hash ^= static_cast<std::uint8_t>(ch);
    hash *= 1099511628211ULL;
  }
  return hash;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace scichat
