#pragma once

#include <cstdint>

namespace msmux {

// Stateless counter-based random stream: every value is a pure function of
// (seed, shot, site, stream), so shots can be sampled in any order or
// concurrently without changing results. The mixing function is the
// SplitMix64 finalizer applied to a keyed combination of the counters.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : key_(mix(seed ^ kSeedSalt)) {}

  constexpr std::uint64_t bits(std::uint64_t shot, std::uint32_t site,
                               std::uint32_t stream) const {
    std::uint64_t h = mix(key_ + shot * kGolden);
    h = mix(h ^ (std::uint64_t{site} * kSiteMul + 1));
    return mix(h ^ (std::uint64_t{stream} * kStreamMul + 2));
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t shot, std::uint32_t site,
                           std::uint32_t stream) const {
    return static_cast<double>(bits(shot, site, stream) >> 11) * 0x1.0p-53;
  }

  // True with probability p; exact at p = 0 and p = 1.
  constexpr bool bernoulli(double p, std::uint64_t shot, std::uint32_t site,
                           std::uint32_t stream) const {
    return uniform(shot, site, stream) < p;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x6d736d75785f7631ULL;
  static constexpr std::uint64_t kSiteMul = 0xd1b54a32d192ed03ULL;
  static constexpr std::uint64_t kStreamMul = 0x8cb92ba72f3d8dd7ULL;

  std::uint64_t key_;
};

}  // namespace msmux
