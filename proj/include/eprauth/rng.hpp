// Splittable random streams. A trial's generator depends only on the master
// seed and the trial counter, so results do not depend on scheduling.
#pragma once

#include <cstdint>
#include <limits>

namespace eprauth {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64 generator; satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream `counter` of the family keyed by `seed`.
  static constexpr Rng stream(std::uint64_t seed, std::uint64_t counter) {
    return Rng(mix64(seed ^ mix64(counter + 0x9e3779b97f4a7c15ULL)));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Derives a child stream without disturbing reproducibility of the parent.
  constexpr Rng split() { return Rng(mix64((*this)() ^ 0xd1b54a32d192ed03ULL)); }

 private:
  std::uint64_t state_;
};

}  // namespace eprauth
