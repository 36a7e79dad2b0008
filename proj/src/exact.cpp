#include "ltfnoise/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include <omp.h>

namespace ltfnoise {

std::string to_string(ExactMethod m) { return m == ExactMethod::dp ? "dp" : "enumeration"; }

namespace {

mpz_class to_mpz(unsigned __int128 v) {
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  const auto lo = static_cast<std::uint64_t>(v);
  mpz_class out(static_cast<unsigned long>(hi));
  out <<= 64;
  out += mpz_class(static_cast<unsigned long>(lo));
  return out;
}

mpz_class to_mpz(std::uint64_t v) { return mpz_class(static_cast<unsigned long>(v)); }

mpz_class pow_mpz(std::int64_t base, std::size_t e) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(e));
  return out;
}

ExactResult make_result(const ThresholdFunction& f, const NoiseParams& noise, ExactMethod method) {
  ExactResult r;
  r.method = method;
  r.n = f.size();
  r.weights.assign(f.weights().begin(), f.weights().end());
  r.threshold = f.threshold();
  r.epsilon = noise.epsilon();
  r.epsilon_rational = noise.rational();
  if (noise.epsilon() > 0.5) r.note = "epsilon > 1/2: the 2*sqrt(eps) and refined bounds do not apply. ";
  return r;
}

void finish_rational(ExactResult& r, mpq_class q) {
  q.canonicalize();
  r.p = q.get_d();
  r.rational = std::move(q);
}

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

// ---------------------------------------------------------------------------
// Enumeration

// Sign of f at every packed index (bit i set <=> x_i = +1).
std::vector<Sign> sign_table(const ThresholdFunction& f) {
  const std::size_t n = f.size();
  const std::size_t points = std::size_t{1} << n;
  std::vector<Sign> signs(points);
  const auto w = f.weights();
  const double t = f.threshold();
  if (f.integer_weights()) {
    // Gray-code walk; every partial sum is an integer below 2^53, so exact.
    double s = -f.weights()[0];
    for (std::size_t i = 1; i < n; ++i) s -= w[i];
    std::size_t code = 0;
    signs[0] = sign_of(s - t);
    for (std::size_t k = 1; k < points; ++k) {
      const auto bit = static_cast<std::size_t>(std::countr_zero(k));
      code ^= std::size_t{1} << bit;
      s += (code >> bit) & 1U ? 2.0 * w[bit] : -2.0 * w[bit];
      signs[code] = sign_of(s - t);
    }
  } else {
    // Direct sums in coordinate order, identical to evaluate().
    for (std::size_t k = 0; k < points; ++k) {
      const std::uint64_t word = k;
      signs[k] = evaluate(f, std::span<const std::uint64_t>(&word, 1));
    }
  }
  return signs;
}

// counts[d] = number of (x, y) pairs with f(x) != f(y) whose flip set (a
// subset of the free coordinates) has size d.
std::vector<std::uint64_t> disagreement_counts(const std::vector<Sign>& signs, std::size_t n,
                                               std::uint64_t free_mask, int workers) {
  const std::size_t free_bits = static_cast<std::size_t>(std::popcount(free_mask));
  std::vector<std::uint64_t> flip_masks;
  std::vector<std::uint8_t> flip_sizes;
  flip_masks.reserve(std::size_t{1} << free_bits);
  for (std::uint64_t s = free_mask;; s = (s - 1) & free_mask) {
    flip_masks.push_back(s);
    flip_sizes.push_back(static_cast<std::uint8_t>(std::popcount(s)));
    if (s == 0) break;
  }

  const auto points = static_cast<std::int64_t>(std::size_t{1} << n);
  std::vector<std::uint64_t> counts(free_bits + 1, 0);
#pragma omp parallel num_threads(workers)
  {
    std::vector<std::uint64_t> local(free_bits + 1, 0);
#pragma omp for schedule(static)
    for (std::int64_t x = 0; x < points; ++x) {
      const Sign sx = signs[static_cast<std::size_t>(x)];
      for (std::size_t k = 0; k < flip_masks.size(); ++k)
        if (signs[static_cast<std::size_t>(x) ^ flip_masks[k]] != sx) ++local[flip_sizes[k]];
    }
#pragma omp critical
    for (std::size_t d = 0; d <= free_bits; ++d) counts[d] += local[d];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Joint (S, S') dynamic programming over the halved index a = (S + W)/2.
//
// Adding a coordinate of weight w moves (a, b) to
//   (a + w, b + w), (a, b)   with weight `keep`  (no flip)
//   (a + w, b), (a, b + w)   with weight `flip`
// where keep/flip are (1-eps)/2, eps/2 in probability mode or (den-num),
// num in integer-count mode.

template <typename T>
struct DenseJoint {
  std::size_t side = 1;  // W + 1
  std::vector<T> cells{T(1)};

  T& at(std::size_t a, std::size_t b) { return cells[a * side + b]; }
  const T& at(std::size_t a, std::size_t b) const { return cells[a * side + b]; }
};

template <typename T>
void add_scaled(T& dst, const T& src, const T& factor) {
  if constexpr (std::is_same_v<T, mpz_class>) {
    if (src != 0) mpz_addmul(dst.get_mpz_t(), src.get_mpz_t(), factor.get_mpz_t());
  } else {
    dst += src * factor;
  }
}

template <typename T>
DenseJoint<T> dense_step(const DenseJoint<T>& prev, std::size_t w, const T& keep, const T& flip,
                         int workers) {
  const std::size_t old_side = prev.side;
  DenseJoint<T> next;
  next.side = old_side + w;
  next.cells.assign(next.side * next.side, T(0));
  const auto rows = static_cast<std::int64_t>(next.side);
#pragma omp parallel for schedule(dynamic, 8) num_threads(workers)
  for (std::int64_t ai = 0; ai < rows; ++ai) {
    const auto a = static_cast<std::size_t>(ai);
    T* out = &next.cells[a * next.side];
    if (a < old_side) {  // x_i = -1 source row a
      const T* src = &prev.cells[a * old_side];
      for (std::size_t b = 0; b < old_side; ++b) {
        add_scaled(out[b], src[b], keep);
        add_scaled(out[b + w], src[b], flip);
      }
    }
    if (a >= w && a - w < old_side) {  // x_i = +1 source row a - w
      const T* src = &prev.cells[(a - w) * old_side];
      for (std::size_t b = 0; b < old_side; ++b) {
        add_scaled(out[b + w], src[b], keep);
        add_scaled(out[b], src[b], flip);
      }
    }
  }
  return next;
}

template <typename T>
using SparseJoint = std::unordered_map<std::uint64_t, T>;

template <typename T>
SparseJoint<T> sparse_step(const SparseJoint<T>& prev, std::uint64_t w, const T& keep,
                           const T& flip) {
  SparseJoint<T> next;
  next.reserve(prev.size() * 2);
  for (const auto& [key, v] : prev) {
    const std::uint64_t a = key >> 32, b = key & 0xffffffffULL;
    auto bump = [&](std::uint64_t na, std::uint64_t nb, const T& factor) {
      if (factor == T(0)) return;
      add_scaled(next[(na << 32) | nb], v, factor);
    };
    bump(a, b, keep);
    bump(a + w, b + w, keep);
    bump(a + w, b, flip);
    bump(a, b + w, flip);
  }
  return next;
}

// Sign of (2a - W - t) for every halved index a.
std::vector<Sign> index_signs(std::int64_t total, double t) {
  std::vector<Sign> s(static_cast<std::size_t>(total) + 1);
  for (std::int64_t a = 0; a <= total; ++a)
    s[static_cast<std::size_t>(a)] = sign_of(static_cast<double>(2 * a - total) - t);
  return s;
}

// Sum of the joint table over cells where the two signs differ.
template <typename T>
T joint_disagreement(const std::vector<std::int64_t>& weights, double t, const T& keep,
                     const T& flip, const ExactLimits& limits) {
  std::int64_t total = 0;
  for (auto w : weights) total += w;
  const auto signs = index_signs(total, t);
  const auto side = static_cast<std::size_t>(total) + 1;
  const int workers = resolve_workers(limits.workers);
  T sum(0);

  if (side * side <= limits.max_dense_cells) {
    DenseJoint<T> table;
    for (auto w : weights) table = dense_step(table, static_cast<std::size_t>(w), keep, flip, workers);
    for (std::size_t a = 0; a < side; ++a)
      for (std::size_t b = 0; b < side; ++b)
        if (signs[a] != signs[b]) sum += table.at(a, b);
    return sum;
  }

  SparseJoint<T> table{{0, T(1)}};
  for (auto w : weights) table = sparse_step(table, static_cast<std::uint64_t>(w), keep, flip);
  std::vector<std::uint64_t> keys;
  keys.reserve(table.size());
  for (const auto& kv : table) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  for (auto key : keys)
    if (signs[key >> 32] != signs[key & 0xffffffffULL]) sum += table.at(key);
  return sum;
}

std::vector<std::int64_t> absolute_integer_weights(const ThresholdFunction& f) {
  auto w = f.integer_weight_vector();
  for (auto& v : w) v = v < 0 ? -v : v;
  return w;
}

void check_dp_caps(const ThresholdFunction& f, const ExactLimits& limits) {
  if (!f.integer_weights())
    throw InvalidArgument("dp engine needs integer weights; use the enumeration engine");
  if (f.total_weight() > static_cast<double>(limits.max_dp_total_weight))
    throw CapExceeded("total weight " + std::to_string(static_cast<long long>(f.total_weight())) +
                          " exceeds the dp cap",
                      "max_dp_total_weight", limits.max_dp_total_weight,
                      f.size() <= limits.max_enum_n ? "enum" : "mc");
}

// Integer subset-sum counts over the halved index.
template <typename T>
std::vector<T> marginal_counts(const std::vector<std::int64_t>& weights) {
  std::vector<T> counts{T(1)};
  for (auto w64 : weights) {
    const auto w = static_cast<std::size_t>(w64);
    std::vector<T> next(counts.size() + w, T(0));
    for (std::size_t a = 0; a < counts.size(); ++a) {
      next[a] += counts[a];
      next[a + w] += counts[a];
    }
    counts = std::move(next);
  }
  return counts;
}

}  // namespace

ExactResult p_exact_enum(const ThresholdFunction& f, const NoiseParams& noise,
                         const std::vector<std::size_t>& exempt, const ExactLimits& limits) {
  const std::size_t n = f.size();
  if (n > limits.max_enum_n)
    throw CapExceeded("n = " + std::to_string(n) + " exceeds the enumeration cap",
                      "max_enum_n", static_cast<long long>(limits.max_enum_n),
                      f.integer_weights() ? "dp" : "mc");
  std::uint64_t free_mask = (std::uint64_t{1} << n) - 1;
  for (auto i : exempt) {
    if (i >= n) throw InvalidArgument("exempt coordinate index out of range");
    free_mask &= ~(std::uint64_t{1} << i);
  }
  const auto free_bits = static_cast<std::size_t>(std::popcount(free_mask));

  const auto signs = sign_table(f);
  const auto counts = disagreement_counts(signs, n, free_mask, resolve_workers(limits.workers));

  ExactResult r = make_result(f, noise, ExactMethod::enumeration);
  if (const auto& q = noise.rational()) {
    // p = sum_d c_d num^d (den-num)^(k-d) / (2^n den^k), k = free_bits.
    mpz_class numer = 0;
    for (std::size_t d = 0; d <= free_bits; ++d)
      if (counts[d] != 0)
        numer += to_mpz(counts[d]) * pow_mpz(q->num, d) * pow_mpz(q->den - q->num, free_bits - d);
    mpz_class denom = pow_mpz(q->den, free_bits);
    denom <<= static_cast<mp_bitcnt_t>(n);
    finish_rational(r, mpq_class(numer, denom));
  } else {
    const double eps = noise.epsilon();
    double p = 0.0;
    for (std::size_t d = 0; d <= free_bits; ++d)
      if (counts[d] != 0)
        p += static_cast<double>(counts[d]) * std::pow(eps, static_cast<double>(d)) *
             std::pow(1.0 - eps, static_cast<double>(free_bits - d));
    r.p = std::ldexp(p, -static_cast<int>(n));
    r.note += "double precision; integer pair counts are exact, relative rounding error ~1e-15";
  }
  return r;
}

double p_exact_enum_reference(const ThresholdFunction& f, const NoiseParams& noise,
                              const std::vector<std::size_t>& exempt) {
  const std::size_t n = f.size();
  std::vector<bool> is_exempt(n, false);
  for (auto i : exempt) is_exempt.at(i) = true;
  const double eps = noise.epsilon();
  const std::size_t points = std::size_t{1} << n;
  double total = 0.0;
  for (std::size_t xi = 0; xi < points; ++xi) {
    std::vector<std::int8_t> xc(n);
    for (std::size_t i = 0; i < n; ++i) xc[i] = (xi >> i) & 1U ? 1 : -1;
    const CubePoint x(xc);
    const Sign fx = evaluate(f, x);
    for (std::size_t yi = 0; yi < points; ++yi) {
      double weight = 1.0;
      std::vector<std::int8_t> yc(n);
      for (std::size_t i = 0; i < n; ++i) {
        yc[i] = (yi >> i) & 1U ? 1 : -1;
        const bool flipped = yc[i] != xc[i];
        if (is_exempt[i]) {
          if (flipped) weight = 0.0;
        } else {
          weight *= flipped ? eps : 1.0 - eps;
        }
      }
      if (weight == 0.0) continue;
      if (evaluate(f, CubePoint(yc)) != fx) total += weight;
    }
  }
  return total / static_cast<double>(points);
}

ExactResult p_exact_dp(const ThresholdFunction& f, const NoiseParams& noise,
                       const ExactLimits& limits) {
  check_dp_caps(f, limits);
  const auto weights = absolute_integer_weights(f);
  const double t = f.threshold();
  const std::size_t n = f.size();
  ExactResult r = make_result(f, noise, ExactMethod::dp);

  if (const auto& q = noise.rational()) {
    // Each path of the dp carries an integer count over (2 den)^n.
    const double bits = static_cast<double>(n) * std::log2(2.0 * static_cast<double>(q->den));
    mpz_class numer;
    if (bits < 126.0) {
      using U = unsigned __int128;
      numer = to_mpz(joint_disagreement<U>(weights, t, U(q->den - q->num), U(q->num), limits));
    } else {
      numer = joint_disagreement<mpz_class>(weights, t, mpz_class(static_cast<long>(q->den - q->num)),
                                            mpz_class(static_cast<long>(q->num)), limits);
    }
    finish_rational(r, mpq_class(numer, pow_mpz(2 * q->den, n)));
  } else {
    const double eps = noise.epsilon();
    r.p = joint_disagreement<double>(weights, t, (1.0 - eps) / 2.0, eps / 2.0, limits);
    r.p = std::clamp(r.p, 0.0, 1.0);
    r.note += "double precision; accumulated rounding error below ~n*W^2*1e-16";
  }
  return r;
}

ExactResult p_exact_auto(const ThresholdFunction& f, const NoiseParams& noise,
                         const ExactLimits& limits) {
  if (f.integer_weights() && f.total_weight() <= static_cast<double>(limits.max_dp_total_weight))
    return p_exact_dp(f, noise, limits);
  if (f.size() <= limits.max_enum_n) return p_exact_enum(f, noise, {}, limits);
  throw CapExceeded("instance exceeds both the dp cap (W <= " +
                        std::to_string(limits.max_dp_total_weight) +
                        ", integer weights) and the enumeration cap (n <= " +
                        std::to_string(limits.max_enum_n) + ")",
                    f.integer_weights() ? "max_dp_total_weight" : "max_enum_n",
                    f.integer_weights() ? limits.max_dp_total_weight
                                        : static_cast<long long>(limits.max_enum_n),
                    "mc");
}

ExactResult tie_probability(const ThresholdFunction& f, const ExactLimits& limits) {
  const std::size_t n = f.size();
  const NoiseParams none(Fraction{0, 1});
  ExactResult r = make_result(f, none, ExactMethod::dp);
  r.epsilon_rational.reset();
  mpz_class ties = 0;

  if (f.integer_weights() && f.total_weight() <= static_cast<double>(limits.max_dp_total_weight)) {
    const auto weights = absolute_integer_weights(f);
    std::int64_t total = 0;
    for (auto w : weights) total += w;
    // <w,X> = 2a - W, so a = (t + W)/2 must be an integer in [0, W].
    const double a = (f.threshold() + static_cast<double>(total)) / 2.0;
    if (std::floor(a) == a && a >= 0.0 && a <= static_cast<double>(total)) {
      const auto idx = static_cast<std::size_t>(a);
      if (n < 63)
        ties = to_mpz(marginal_counts<std::uint64_t>(weights)[idx]);
      else
        ties = marginal_counts<mpz_class>(weights)[idx];
    }
  } else {
    if (n > 2 * limits.max_enum_n)
      throw CapExceeded("n = " + std::to_string(n) + " exceeds the tie enumeration cap",
                        "2*max_enum_n", static_cast<long long>(2 * limits.max_enum_n), "none");
    r.method = ExactMethod::enumeration;
    const auto signs = sign_table(f);
    std::uint64_t count = 0;
    for (auto s : signs) count += s == Sign::zero;
    ties = to_mpz(count);
  }
  mpz_class denom = 1;
  denom <<= static_cast<mp_bitcnt_t>(n);
  finish_rational(r, mpq_class(ties, denom));
  r.note.clear();
  return r;
}

}  // namespace ltfnoise
