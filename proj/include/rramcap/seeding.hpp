#pragma once

#include <cstdint>
#include <initializer_list>

namespace rramcap {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: a pure function of the parent seed and the
/// counters, so results do not depend on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t s = mix64(seed);
  for (std::uint64_t c : counters) s = mix64(s ^ mix64(c + 0x632BE59BD9B4E019ULL));
  return s;
}

}  // namespace rramcap
