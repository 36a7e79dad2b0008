#pragma once

// Executable checks of the random-partition argument behind the 2 sqrt(eps)
// bound. Coordinates are split into blocks A_0..A_m by i.i.d. labels tau_i
// with P(tau = j) = eps for 1 <= j <= m and P(tau = 0) = 1 - m eps, where
// m = floor(1/eps). Block 1 plays the role of the noise: Y_1 - S_1 has the law
// of <w, N_eps X> given X.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "ltfnoise/core.hpp"
#include "ltfnoise/rng.hpp"

namespace ltfnoise {

struct PartitionTrace {
  std::int64_t m = 0;
  std::vector<int> tau;                          // tau_i in {0..m}
  std::vector<std::vector<std::size_t>> blocks;  // A_0..A_m (zero-based coordinates)
  std::vector<double> block_sums;                // S_0..S_m
  double y1 = 0.0;                               // <w,X> - S_1
  std::vector<Sign> xi;                          // sgn(S_j), j = 0..m (index 0 unused)
  std::vector<std::int64_t> lambda;              // {j in 1..m : S_j != 0}
  std::int64_t b_lambda = 0;                     // #{j in lambda : xi_j = +1}
  CubePoint x{std::vector<std::int8_t>{1}};

  double total() const;   // sum_j S_j = <w,X>
  std::int64_t nonempty_blocks() const;  // #{j in 1..m : A_j nonempty}
};

// Requires eps > 0 and threshold 0 (reduce the threshold first).
PartitionTrace sample_partition(const ThresholdFunction& f, const NoiseParams& noise,
                                CounterRng& rng);

struct KeypointCheck {
  int lhs = 0;
  double rhs = 0.0;
  bool equal = false;
};

// lhs = 1[sgn(y1 + s1) != sgn(y1 - s1)];
// rhs = 2 * 1[s1 != 0] * (1/2 - P(sgn(S + y1) = -sgn(S))), S uniform on {-|s1|, |s1|}.
// `fault` is added to rhs (negative control only).
KeypointCheck check_keypoint(double s1, double y1, double fault = 0.0);

struct PointwiseCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// lhs = sum_{j in lambda} (1/2 - 1[sgn<w,X> = -xi_j]);
// rhs = |B_lambda - #lambda/2| + (1/2) 1[<w,X> = 0] #{j >= 1 : A_j nonempty}.
PointwiseCheck check_pointwise_inequality(const PartitionTrace& trace, Sign sign_wx);

bool check_mad_monotone(std::int64_t l_max);

struct StatisticalCheck {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double target = 0.0;
  std::uint64_t draws = 0;
  bool passed = false;
};

// Frequency of sgn(Y_1 + S_1) != sgn(Y_1 - S_1) over sampled partitions
// against the exact p_eps (Wilson interval).
StatisticalCheck check_setup_law(const ThresholdFunction& f, const NoiseParams& noise,
                                 std::uint64_t draws, std::uint64_t seed, double level = 0.99,
                                 int workers = 0);

// Mean of (2/m) sum_{j in lambda} (1/2 - 1[sgn<w,X> = -xi_j]) against the
// exact p_eps (normal interval from the sample variance).
StatisticalCheck check_tight(const ThresholdFunction& f, const NoiseParams& noise,
                             std::uint64_t draws, std::uint64_t seed, double level = 0.99,
                             int workers = 0);

struct TightExactCheck {
  mpq_class expectation;   // exact E over (x, tau)
  mpq_class p;             // exact p_eps
  bool equal = false;
};

// Full enumeration of (x, tau); requires a rational eps and 2^n (m+1)^n <= 2^24.
TightExactCheck check_tight_exact(const ThresholdFunction& f, const NoiseParams& noise);

// E|B_lambda - #lambda/2| against E|B_m - m/2|: passes unless the sampled
// mean is significantly above the latter.
StatisticalCheck check_lambda_averaging(const ThresholdFunction& f, const NoiseParams& noise,
                                        std::uint64_t draws, std::uint64_t seed,
                                        double level = 0.99);

// ---------------------------------------------------------------------------
// Verification report

struct VerificationCheck {
  std::string name;
  std::string instance;
  std::uint64_t cases = 0;
  bool passed = false;
  std::map<std::string, double> values;
  std::string detail;
};

struct VerificationReport {
  std::vector<VerificationCheck> checks;
  bool all_passed() const;
};

struct VerifyConfig {
  std::uint64_t seed = 20240601;
  bool keypoint_only = false;
  bool inject_fault = false;            // perturbs the keypoint rhs
  std::uint64_t keypoint_random_pairs = 100'000;
  std::uint64_t tight_draws = 1'000'000;
  std::uint64_t pointwise_traces = 100'000;
  std::uint64_t setup_draws = 200'000;
  std::int64_t mad_l_max = 200;
  double level = 0.99;
  int workers = 0;
  // Instances for the statistical checks; empty means the built-in corpus.
  std::vector<std::pair<ThresholdFunction, NoiseParams>> instances;
};

std::vector<std::pair<ThresholdFunction, NoiseParams>> default_verification_corpus();

VerificationReport run_verification(const VerifyConfig& config);

}  // namespace ltfnoise
