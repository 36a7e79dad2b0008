#pragma once

// Domain types for weighted majority (linear threshold) functions on the
// {-1,+1} cube: the function itself, the noise parameters, cube points and
// their bit-packed form.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltfnoise {

class CounterRng;

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when an engine is asked to work beyond a configured size cap.
struct CapExceeded : std::runtime_error {
  CapExceeded(const std::string& what, std::string cap_name, long long cap_value,
              std::string suggestion)
      : std::runtime_error(what),
        cap_name(std::move(cap_name)),
        cap_value(cap_value),
        suggestion(std::move(suggestion)) {}
  std::string cap_name;
  long long cap_value;
  std::string suggestion;
};

// Three-valued sign: sgn(0) = 0.
enum class Sign : std::int8_t { negative = -1, zero = 0, positive = 1 };

template <typename T>
constexpr Sign sign_of(T v) {
  return v > T(0) ? Sign::positive : (v < T(0) ? Sign::negative : Sign::zero);
}

constexpr int to_int(Sign s) { return static_cast<int>(s); }
constexpr Sign negate(Sign s) { return static_cast<Sign>(-static_cast<int>(s)); }

// Reduced fraction num/den with den > 0.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction reduced(std::int64_t num, std::int64_t den);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

// f(x) = sgn(sum_i w_i x_i - t) with nonzero weights.
class ThresholdFunction {
 public:
  ThresholdFunction(std::vector<double> weights, double threshold);

  static ThresholdFunction simple_majority(std::size_t n, double threshold = 0.0);

  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double threshold() const { return threshold_; }

  // True iff every weight and the threshold are integers (exactly
  // representable, |v| < 2^53).
  bool integer_mode() const { return integer_mode_; }
  // True iff every weight is an integer; the threshold may be any real.
  bool integer_weights() const { return integer_weights_; }
  bool unit_weights() const;

  // Weights as integers; only meaningful when integer_weights().
  std::vector<std::int64_t> integer_weight_vector() const;
  // Sum of |w_i|.
  double total_weight() const;

 private:
  std::vector<double> weights_;
  double threshold_;
  bool integer_mode_ = false;
  bool integer_weights_ = false;
};

// Flip probability epsilon in [0,1], optionally carried as an exact fraction.
class NoiseParams {
 public:
  explicit NoiseParams(double epsilon);
  explicit NoiseParams(Fraction epsilon);
  NoiseParams(std::int64_t num, std::int64_t den) : NoiseParams(Fraction::reduced(num, den)) {}

  double epsilon() const { return epsilon_; }
  const std::optional<Fraction>& rational() const { return rational_; }
  bool is_rational() const { return rational_.has_value(); }

  // m = floor(1/epsilon); requires epsilon > 0.
  std::int64_t m() const;

 private:
  double epsilon_;
  std::optional<Fraction> rational_;
};

// A point of {-1,+1}^n stored as a flat vector.
class CubePoint {
 public:
  explicit CubePoint(std::vector<std::int8_t> coordinates);

  std::size_t size() const { return coords_.size(); }
  std::span<const std::int8_t> coordinates() const { return coords_; }
  int operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const CubePoint&, const CubePoint&) = default;

 private:
  std::vector<std::int8_t> coords_;
};

// Canonical packing shared by every engine: coordinate i lives in bit
// (i % 64) of word (i / 64); +1 maps to bit 1, -1 to bit 0.
struct PackedPoint {
  std::size_t n = 0;
  std::vector<std::uint64_t> words;
};

constexpr std::size_t words_for(std::size_t n) { return (n + 63) / 64; }
// Mask of valid bits in the last word.
constexpr std::uint64_t tail_mask(std::size_t n) {
  return (n % 64 == 0) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (n % 64)) - 1);
}

PackedPoint pack(const CubePoint& x);
CubePoint unpack(const PackedPoint& p);

Sign evaluate(const ThresholdFunction& f, const CubePoint& x);
// Same function on a packed point.
Sign evaluate(const ThresholdFunction& f, std::span<const std::uint64_t> words);

// Negates each coordinate independently with probability epsilon, consuming
// one 64-bit draw per coordinate (see FlipGate).
CubePoint apply_noise(const CubePoint& x, const NoiseParams& noise, CounterRng& rng);

// Result of moving a nonzero threshold into an extra coordinate.
struct ReducedThreshold {
  ThresholdFunction function;      // weights (w_1..w_n, t), threshold 0
  std::size_t exempt_index;        // zero-based index n of the noise-exempt coordinate
};

ReducedThreshold reduce_threshold(const ThresholdFunction& f);

}  // namespace ltfnoise
