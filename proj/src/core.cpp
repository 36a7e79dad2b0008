#include "ltfnoise/core.hpp"

#include <cmath>
#include <numeric>

#include "ltfnoise/rng.hpp"

namespace ltfnoise {

namespace {

constexpr double kExactIntegerLimit = 9007199254740992.0;  // 2^53

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

Fraction Fraction::reduced(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvalidArgument("fraction with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Fraction{num, den};
}

ThresholdFunction::ThresholdFunction(std::vector<double> weights, double threshold)
    : weights_(std::move(weights)), threshold_(threshold) {
  if (weights_.empty()) throw InvalidArgument("threshold function needs at least one weight");
  if (!std::isfinite(threshold_)) throw InvalidArgument("threshold must be finite");
  bool all_int = true;
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!std::isfinite(w)) throw InvalidArgument("weights must be finite");
    if (w == 0.0)
      throw InvalidArgument("weight " + std::to_string(i + 1) +
                            " is zero; drop zero-weight coordinates before constructing");
    all_int = all_int && is_integer(w);
    total += std::fabs(w);
  }
  // Integer sums are exact in double arithmetic below 2^53.
  integer_weights_ = all_int && total < kExactIntegerLimit;
  integer_mode_ = integer_weights_ && is_integer(threshold_) &&
                  total + std::fabs(threshold_) < kExactIntegerLimit;
}

ThresholdFunction ThresholdFunction::simple_majority(std::size_t n, double threshold) {
  return ThresholdFunction(std::vector<double>(n, 1.0), threshold);
}

bool ThresholdFunction::unit_weights() const {
  for (double w : weights_)
    if (w != 1.0) return false;
  return true;
}

std::vector<std::int64_t> ThresholdFunction::integer_weight_vector() const {
  std::vector<std::int64_t> out;
  out.reserve(weights_.size());
  for (double w : weights_) out.push_back(static_cast<std::int64_t>(w));
  return out;
}

double ThresholdFunction::total_weight() const {
  double total = 0.0;
  for (double w : weights_) total += std::fabs(w);
  return total;
}

NoiseParams::NoiseParams(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
}

NoiseParams::NoiseParams(Fraction epsilon) {
  const Fraction r = Fraction::reduced(epsilon.num, epsilon.den);
  if (r.num < 0 || r.num > r.den) throw InvalidArgument("epsilon must lie in [0, 1]");
  rational_ = r;
  epsilon_ = r.to_double();
}

std::int64_t NoiseParams::m() const {
  if (epsilon_ <= 0.0) throw InvalidArgument("m = floor(1/epsilon) is undefined for epsilon = 0");
  if (rational_) return rational_->den / rational_->num;
  auto m = static_cast<std::int64_t>(std::floor(1.0 / epsilon_));
  // Enforce m*eps <= 1 < (m+1)*eps in the arithmetic actually used.
  while (m > 1 && static_cast<double>(m) * epsilon_ > 1.0) --m;
  while (static_cast<double>(m + 1) * epsilon_ <= 1.0) ++m;
  return m;
}

CubePoint::CubePoint(std::vector<std::int8_t> coordinates) : coords_(std::move(coordinates)) {
  for (auto c : coords_)
    if (c != 1 && c != -1) throw InvalidArgument("cube point coordinates must be +1 or -1");
}

PackedPoint pack(const CubePoint& x) {
  PackedPoint p{x.size(), std::vector<std::uint64_t>(words_for(x.size()), 0)};
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0) p.words[i / 64] |= std::uint64_t{1} << (i % 64);
  return p;
}

CubePoint unpack(const PackedPoint& p) {
  if (p.words.size() < words_for(p.n)) throw InvalidArgument("packed point too short");
  std::vector<std::int8_t> c(p.n);
  for (std::size_t i = 0; i < p.n; ++i) c[i] = ((p.words[i / 64] >> (i % 64)) & 1U) ? 1 : -1;
  return CubePoint(std::move(c));
}

Sign evaluate(const ThresholdFunction& f, const CubePoint& x) {
  if (x.size() != f.size())
    throw InvalidArgument("dimension mismatch: function has " + std::to_string(f.size()) +
                          " inputs, point has " + std::to_string(x.size()));
  const auto w = f.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += x[i] > 0 ? w[i] : -w[i];
  return sign_of(s - f.threshold());
}

Sign evaluate(const ThresholdFunction& f, std::span<const std::uint64_t> words) {
  if (words.size() < words_for(f.size())) throw InvalidArgument("dimension mismatch");
  const auto w = f.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    s += ((words[i / 64] >> (i % 64)) & 1U) ? w[i] : -w[i];
  return sign_of(s - f.threshold());
}

CubePoint apply_noise(const CubePoint& x, const NoiseParams& noise, CounterRng& rng) {
  const FlipGate gate(noise.epsilon());
  std::vector<std::int8_t> y(x.coordinates().begin(), x.coordinates().end());
  for (auto& c : y)
    if (gate(rng.next())) c = static_cast<std::int8_t>(-c);
  return CubePoint(std::move(y));
}

ReducedThreshold reduce_threshold(const ThresholdFunction& f) {
  if (f.threshold() == 0.0) throw InvalidArgument("threshold is already zero; no reduction needed");
  std::vector<double> w(f.weights().begin(), f.weights().end());
  w.push_back(f.threshold());
  return ReducedThreshold{ThresholdFunction(std::move(w), 0.0), f.size()};
}

}  // namespace ltfnoise
