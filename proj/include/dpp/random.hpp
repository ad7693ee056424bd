#pragma once

#include <cstdint>

namespace dpp {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed, e.g. one per sweep point or per
/// ensemble member.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept {
  return mix64(root ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based random stream: draw i is a pure function of (seed, i).
///
/// Every stochastic decision in a run (event draws, randomized policy draws)
/// consumes the same stream in slot order, so traces are bit-reproducible
/// across platforms. The double conversion is hand-rolled for that reason;
/// std::uniform_real_distribution is implementation-defined.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  std::uint64_t next_u64() noexcept {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dpp
