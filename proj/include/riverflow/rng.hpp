#pragma once

#include <cmath>
#include <cstdint>

namespace riverflow {

// 64-bit finalizer from SplitMix64. Full avalanche, bijective.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive a stream key from a purpose tag and up to two indices.
// Streams keyed on distinct tuples are statistically independent.
inline constexpr std::uint64_t stream_key(std::uint64_t purpose, std::uint64_t i = 0,
                                          std::uint64_t j = 0) {
  return mix64(mix64(mix64(purpose) ^ i) ^ j);
}

namespace streams {
inline constexpr std::uint64_t kStormTimes = 0x01;
inline constexpr std::uint64_t kMarks = 0x02;
inline constexpr std::uint64_t kNetworkGen = 0x03;
inline constexpr std::uint64_t kHeterogeneity = 0x04;
}  // namespace streams

/// Counter-based random stream: output i is a pure function of
/// (seed, key, i), so replaying any (seed, key) pair reproduces the
/// stream bit-for-bit regardless of how work is scheduled.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t key)
      : base_(mix64(mix64(seed) ^ key)) {}

  std::uint64_t next_u64() { return mix64(base_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform double in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double mean) { return -mean * std::log(uniform()); }

  /// Standard normal via Box-Muller (consumes two uniforms).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace riverflow
