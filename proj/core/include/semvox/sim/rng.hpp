#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace semvox::sim {

/// SplitMix64 (Steele, Lea & Flood 2014): 64-bit state advanced by the golden
/// gamma 0x9e3779b97f4a7c15, output passed through the murmur3-style
/// finalizer. Uniform doubles take the top 53 bits; normals use Box-Muller
/// with no cached second value.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    constexpr double kTwoPi = 6.283185307179586476925;
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and stream labels
/// (frame index, sensor index, ...), so draws never depend on call order.
inline std::uint64_t stream_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> labels) {
  SplitMix64 g(seed);
  std::uint64_t h = g.next();
  for (std::uint64_t l : labels) {
    SplitMix64 m(h ^ (l * 0xd1b54a32d192ed03ULL));
    h = m.next();
  }
  return h;
}

}  // namespace semvox::sim
