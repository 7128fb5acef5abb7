#pragma once

#include <cstdint>
#include <random>

namespace aew {

// SplitMix64 step; used to whiten seeds and derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic random source. Draws are implemented with explicit bit
/// manipulation (not std::uniform_real_distribution, whose output is
/// implementation-defined) so streams are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Independent generator for replication `stream` of a run seeded with
  /// `seed`. Substreams with distinct ids never share state.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(substream_seed(seed, stream));
  }

  /// Raw seed value behind substream(); exposed so samplers that take a seed
  /// can join the same substream scheme.
  static std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream ^ 0x7C15D1E995ULL));
  }

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1), 53 random mantissa bits
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // unbiased uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace aew
