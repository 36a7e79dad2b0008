#include "ltfnoise/rng.hpp"

#include <cmath>

#include "ltfnoise/core.hpp"

namespace ltfnoise {

FlipGate::FlipGate(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("flip probability outside [0,1]");
  if (epsilon >= 1.0) {
    always_ = true;
    return;
  }
  // epsilon < 1 so epsilon * 2^64 < 2^64; the scaling is exact.
  threshold_ = static_cast<std::uint64_t>(std::floor(std::ldexp(epsilon, 64)));
}

double FlipGate::realized() const {
  return always_ ? 1.0 : std::ldexp(static_cast<double>(threshold_), -64);
}

}  // namespace ltfnoise
