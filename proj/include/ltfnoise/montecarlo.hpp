#pragma once

// Paired-sample Monte Carlo estimation of p_eps: draw X uniformly, apply
// fresh noise, count f(X) != f(N_eps X) with the three-valued sign.
//
// Sample i always draws from CounterRng(seed, i), so the estimate does not
// depend on how samples are split across workers. Each sample consumes
//   words_for(n) draws for X (packed, +1 <-> bit 1), then the flip decisions
// produced by one of two schemes:
//   per_coordinate  one 64-bit draw per coordinate against floor(eps 2^64);
//   dyadic_words    one 64-coordinate word at a time, eps truncated to a
//                   32-bit dyadic rational and realized by a lazy bitwise
//                   comparison of random words against its binary expansion.
// Either evaluator (weighted sums or popcount) can be driven by either scheme;
// on the same scheme they see identical decisions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltfnoise/core.hpp"
#include "ltfnoise/rng.hpp"

namespace ltfnoise {

enum class DecisionScheme { per_coordinate, dyadic_words };
enum class McMethod { general, bitparallel };

std::string to_string(DecisionScheme s);
std::string to_string(McMethod m);

struct McOptions {
  int workers = 0;          // 0: OpenMP default (LTFNOISE_THREADS is applied by the CLI)
  double level = 0.99;      // two-sided confidence level of the Wilson interval
  // general path defaults to per_coordinate, bit-parallel to dyadic_words.
  std::optional<DecisionScheme> scheme;
};

struct McEstimate {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;   // sqrt(p_hat (1 - p_hat) / samples)
  std::uint64_t disagreements = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  double level = 0.99;
  double epsilon = 0.0;
  double realized_epsilon = 0.0;  // flip probability actually sampled
  McMethod method = McMethod::general;
  DecisionScheme scheme = DecisionScheme::per_coordinate;
  double elapsed_seconds = 0.0;
};

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;
};

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level);
// Two-sided standard normal quantile for `level`, e.g. 2.5758 for 0.99.
double normal_two_sided_z(double level);

// The dyadic flip probability used by the dyadic_words scheme:
// floor(eps 2^32) / 2^32, except eps = 1 which is kept exactly.
double dyadic_epsilon(double epsilon);

// Draws one sample's packed X and flip words from `rng`.
void draw_pair(std::size_t n, double epsilon, DecisionScheme scheme, CounterRng& rng,
               std::uint64_t* x_words, std::uint64_t* flip_words);

// General weighted evaluator, OpenMP over sample indices.
McEstimate estimate(const ThresholdFunction& f, const NoiseParams& noise, std::uint64_t samples,
                    std::uint64_t seed, const McOptions& options = {});

// Serial reference for `estimate`: unpacked CubePoints, evaluate() and an
// explicit flip per coordinate. Same sample stream, same result.
McEstimate estimate_serial(const ThresholdFunction& f, const NoiseParams& noise,
                           std::uint64_t samples, std::uint64_t seed, const McOptions& options = {});

// Unit weights, threshold t: signs from population counts of packed words.
McEstimate estimate_bitparallel(std::size_t n, double t, const NoiseParams& noise,
                                std::uint64_t samples, std::uint64_t seed,
                                const McOptions& options = {});

// A function family for sweeps: simple majority of size n or explicit weights.
struct FamilySpec {
  std::vector<double> weights;   // empty means simple majority of size n
  std::size_t n = 0;
  double threshold = 0.0;

  static FamilySpec simple(std::size_t n, double t = 0.0) { return FamilySpec{{}, n, t}; }
  static FamilySpec explicit_weights(std::vector<double> w, double t = 0.0) {
    const std::size_t n = w.size();
    return FamilySpec{std::move(w), n, t};
  }
  bool is_simple() const { return weights.empty(); }
  ThresholdFunction function() const;
  // "simple" or a 16-hex-digit FNV-1a hash of the weight list.
  std::string weights_id() const;
};

struct SweepOptions {
  McOptions mc;
  bool use_bitparallel = true;   // for unit weights
};

struct SweepRow {
  FamilySpec family;
  double epsilon = 0.0;
  McEstimate estimate;
};

// One estimate per grid point. Point k is seeded from (seed, bits of eps_k),
// so any point can be reproduced on its own.
std::vector<SweepRow> sweep(const FamilySpec& family, const std::vector<double>& grid,
                            std::uint64_t samples, std::uint64_t seed,
                            const SweepOptions& options = {});

std::uint64_t sweep_point_seed(std::uint64_t seed, double epsilon);

}  // namespace ltfnoise
