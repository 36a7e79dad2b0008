#pragma once

// Closed-form bounds and limits for the noise sensitivity of weighted
// majority functions.

#include <cstdint>
#include <optional>

#include <gmpxx.h>

#include "ltfnoise/core.hpp"

namespace ltfnoise {

// Largest m (or n) for which the binomial sums are carried out with exact
// integers; beyond it the terms are summed in log space.
inline constexpr std::int64_t kExactBinomialCap = 4096;

struct BinomialMad {
  std::int64_t m = 0;
  double value = 0.0;                // E|B_m - m/2|, B_m ~ Binomial(m, 1/2)
  std::optional<mpq_class> exact;    // present for m <= kExactBinomialCap
};

// Direct summation of C(m,k) 2^-m |k - m/2|. m must lie in [1, 10^6].
BinomialMad mad_binomial(std::int64_t m);

// Which hypotheses of the bounds hold for a given epsilon.
struct Hypotheses {
  bool eps_le_half = false;
  bool eps_le_quarter = false;
};

Hypotheses hypotheses_for(double epsilon);

struct BoundValue {
  double value = 0.0;
  std::optional<mpq_class> exact;
  Hypotheses hypotheses;
};

// 2 sqrt(eps), for 0 < eps <= 1/2.
BoundValue bound_sqrt(const NoiseParams& noise);

struct RefinedBound {
  BoundValue bound;
  std::int64_t m = 0;
  BinomialMad mad;
  double mad_term = 0.0;       // (2/m) E|B_m - m/2|
  double tie_term = 0.0;       // [1 - (1-eps)^n] C(n, floor(n/2)) 2^-n
};

// (2/m) E|B_m - m/2| + [1 - (1-eps)^n] C(n, floor(n/2)) 2^-n with
// m = floor(1/eps), for 0 < eps <= 1/2. Exact when eps is rational and n, m
// are within kExactBinomialCap.
RefinedBound bound_refined(std::int64_t n, const NoiseParams& noise);

struct SpernerBound {
  std::int64_t n = 0;
  double value = 0.0;                 // C(n, floor(n/2)) 2^-n
  std::optional<mpq_class> exact;
  double auxiliary = 0.0;             // sqrt(3/4) / sqrt(n)
  bool auxiliary_holds = false;       // value <= auxiliary
};

SpernerBound sperner_bound(std::int64_t n);

struct SheppardValue {
  double p = 0.0;       // arccos(1 - 2 eps) / pi
  double alpha = 0.0;   // arccos(1 - 2 eps)
};

// Limit of p_eps for simple majority as n -> infinity; any eps in [0, 1].
SheppardValue sheppard(const NoiseParams& noise);

// E|2 B_m - m| / sqrt(m); tends to sqrt(2/pi).
double clt_constant_check(std::int64_t m);

inline constexpr double kSqrtTwoOverPi = 0.79788456080286535588;
inline constexpr double kTwoOverPi = 0.63661977236758134308;

}  // namespace ltfnoise
