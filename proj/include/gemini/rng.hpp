#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gemini {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: every draw is a pure function of its key, so
/// results do not depend on evaluation order.
struct CounterRng {
  std::uint64_t seed = 0;

  constexpr std::uint64_t bits(std::uint64_t entity, std::uint64_t channel, std::uint64_t counter,
                               std::uint64_t lane = 0) const {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ entity);
    h = splitmix64(h ^ channel);
    h = splitmix64(h ^ counter);
    return splitmix64(h ^ lane);
  }

  /// Uniform in (0, 1].
  double uniform(std::uint64_t entity, std::uint64_t channel, std::uint64_t counter, std::uint64_t lane = 0) const {
    return static_cast<double>((bits(entity, channel, counter, lane) >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller over lanes 0 and 1.
  double normal(std::uint64_t entity, std::uint64_t channel, std::uint64_t counter) const {
    const double u1 = uniform(entity, channel, counter, 0);
    const double u2 = uniform(entity, channel, counter, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

}  // namespace gemini
