#pragma once

#include <cmath>
#include <cstdint>

namespace gmmlab {

// SplitMix64 finalizer, used as a keyed bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator: draw i of stream (seed, stream) is a pure function
// of (seed, stream, i). Parallel batches index disjoint counter ranges and
// reproduce the serial draws exactly.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(mix64(seed + 0x632be59bd9b4e019ULL) ^ mix64(~stream))) {}

  std::uint64_t bits(std::uint64_t i) const { return mix64(key_ ^ mix64(i)); }

  // uniform in the open interval (0,1)
  double uniform(std::uint64_t i) const {
    return static_cast<double>(bits(i) >> 11) * 0x1p-53 + 0x1p-54;
  }

  // standard normal pair from counters (i, i+1), Box-Muller
  void normal_pair(std::uint64_t i, double& z0, double& z1) const {
    const double u1 = uniform(i);
    const double u2 = uniform(i + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
  }

 private:
  std::uint64_t key_;
};

}  // namespace gmmlab
