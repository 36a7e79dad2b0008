#pragma once

// Counter-based random streams. A stream is keyed by (seed, stream id) and
// the k-th output is a pure function of (key, k), so any partition of stream
// ids across workers reproduces the same numbers.

#include <cstdint>
#include <limits>

namespace ltfnoise {

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + kGoldenGamma));
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(derive_key(seed, stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  result_type next() { return mix64(key_ + kGoldenGamma * ++counter_); }

  // Uniform double in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Bernoulli(epsilon) decision from one uniform 64-bit draw: fires iff the
// draw is below floor(epsilon * 2^64). epsilon = 1 always fires.
class FlipGate {
 public:
  explicit FlipGate(double epsilon);

  bool operator()(std::uint64_t u) const { return always_ || u < threshold_; }
  // Probability actually realized by the gate.
  double realized() const;

 private:
  std::uint64_t threshold_ = 0;
  bool always_ = false;
};

}  // namespace ltfnoise
