#pragma once

// Exact noise sensitivity p_eps(n, w, t) = P(f(X) != f(N_eps(X))) and the tie
// probability P(<w,X> = t).
//
// Two engines:
//   * enumeration over all pairs (x, y) in {-1,1}^n x {-1,1}^n, any weights,
//     cost 4^n (2^n * 2^(non-exempt n));
//   * dynamic programming over the joint law of (<w,X>, <w,N_eps X>), integer
//     weights, cost O(n * W^2) with W = sum |w_i|.
// Both return a double and, when epsilon is an exact fraction, the exact
// reduced rational.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "ltfnoise/core.hpp"

namespace ltfnoise {

enum class ExactMethod { enumeration, dp };

std::string to_string(ExactMethod m);

struct ExactLimits {
  std::size_t max_enum_n = 13;
  std::int64_t max_dp_total_weight = 2000;
  // Dense (W+1)^2 tables above this cell count switch to a sparse map.
  std::size_t max_dense_cells = std::size_t{1} << 24;
  // 0 means the OpenMP default.
  int workers = 0;
};

struct ExactResult {
  double p = 0.0;
  std::optional<mpq_class> rational;   // reduced; present iff epsilon was rational
  ExactMethod method = ExactMethod::enumeration;
  std::size_t n = 0;
  std::vector<double> weights;
  double threshold = 0.0;
  double epsilon = 0.0;
  std::optional<Fraction> epsilon_rational;
  // Human-readable note on float accuracy or applicability.
  std::string note;
};

// Enumeration engine. Coordinates listed in `exempt` (zero-based) never flip.
ExactResult p_exact_enum(const ThresholdFunction& f, const NoiseParams& noise,
                         const std::vector<std::size_t>& exempt = {},
                         const ExactLimits& limits = {});

// Same quantity by a plain nested loop over (x, y); kept as a test reference
// for the parallel enumeration kernel. Double precision only.
double p_exact_enum_reference(const ThresholdFunction& f, const NoiseParams& noise,
                              const std::vector<std::size_t>& exempt = {});

// Joint-sum dynamic programming. Requires integer weights; the threshold may
// be any real (comparisons of integer sums against t are exact).
ExactResult p_exact_dp(const ThresholdFunction& f, const NoiseParams& noise,
                       const ExactLimits& limits = {});

// Picks dp when the weights are integers within the dp cap, else enumeration
// within its cap; throws CapExceeded otherwise.
ExactResult p_exact_auto(const ThresholdFunction& f, const NoiseParams& noise,
                         const ExactLimits& limits = {});

// P(<w,X> = t), exact rational always (the probability has a power-of-two
// denominator). Uses the single-marginal dp for integer weights within the
// dp cap, otherwise enumeration.
ExactResult tie_probability(const ThresholdFunction& f, const ExactLimits& limits = {});

}  // namespace ltfnoise
