#include "ltfnoise/montecarlo.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <boost/math/distributions/normal.hpp>
#include <omp.h>

namespace ltfnoise {

std::string to_string(DecisionScheme s) {
  return s == DecisionScheme::dyadic_words ? "dyadic_words" : "per_coordinate";
}

std::string to_string(McMethod m) { return m == McMethod::bitparallel ? "bitparallel" : "general"; }

double normal_two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 1.0 - (1.0 - level) / 2.0);
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0) throw InvalidArgument("Wilson interval needs at least one trial");
  const double z = normal_two_sided_z(level);
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nt;
  const double center = (p + z2 / (2.0 * nt)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt));
  WilsonInterval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  // Rounding at p in {0, 1} can push an endpoint past the point estimate.
  ci.low = std::min(ci.low, p);
  ci.high = std::max(ci.high, p);
  return ci;
}

namespace {

constexpr int kDyadicBits = 32;

std::uint32_t dyadic_bits(double epsilon) {
  return static_cast<std::uint32_t>(std::floor(std::ldexp(epsilon, kDyadicBits)));
}

// Bernoulli(bits / 2^32) on each of 64 lanes: compare a uniform random
// binary fraction U, drawn one bit plane at a time, against the expansion of
// eps; a lane is decided at the first plane where the two differ.
std::uint64_t dyadic_flip_word(std::uint32_t bits, CounterRng& rng) {
  std::uint64_t undecided = ~std::uint64_t{0};
  std::uint64_t flips = 0;
  for (int j = kDyadicBits - 1; j >= 0 && undecided != 0; --j) {
    // No set bits left in eps: every undecided lane has U >= eps.
    if ((bits & ((std::uint64_t{1} << (j + 1)) - 1)) == 0) break;
    const std::uint64_t u = rng.next();
    if ((bits >> j) & 1U) {
      flips |= undecided & ~u;
      undecided &= u;
    } else {
      undecided &= ~u;
    }
  }
  return flips;
}

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

double realized_for(double epsilon, DecisionScheme scheme) {
  return scheme == DecisionScheme::dyadic_words ? dyadic_epsilon(epsilon)
                                                : FlipGate(epsilon).realized();
}

McEstimate finish(std::uint64_t count, std::uint64_t samples, std::uint64_t seed, int workers,
                  double level, double epsilon, McMethod method, DecisionScheme scheme,
                  std::chrono::steady_clock::time_point start) {
  McEstimate e;
  e.disagreements = count;
  e.samples = samples;
  e.seed = seed;
  e.workers = workers;
  e.level = level;
  e.epsilon = epsilon;
  e.realized_epsilon = realized_for(epsilon, scheme);
  e.method = method;
  e.scheme = scheme;
  e.p_hat = static_cast<double>(count) / static_cast<double>(samples);
  e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(samples));
  const auto ci = wilson_interval(count, samples, level);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  e.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

void check_samples(std::uint64_t samples) {
  if (samples < 1) throw InvalidArgument("samples must be >= 1");
}

}  // namespace

double dyadic_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  if (epsilon >= 1.0) return 1.0;
  return std::ldexp(static_cast<double>(dyadic_bits(epsilon)), -kDyadicBits);
}

void draw_pair(std::size_t n, double epsilon, DecisionScheme scheme, CounterRng& rng,
               std::uint64_t* x_words, std::uint64_t* flip_words) {
  const std::size_t nw = words_for(n);
  for (std::size_t k = 0; k < nw; ++k) x_words[k] = rng.next();
  x_words[nw - 1] &= tail_mask(n);
  if (scheme == DecisionScheme::per_coordinate) {
    const FlipGate gate(epsilon);
    std::fill(flip_words, flip_words + nw, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (gate(rng.next())) flip_words[i / 64] |= std::uint64_t{1} << (i % 64);
  } else {
    if (epsilon >= 1.0) {
      std::fill(flip_words, flip_words + nw, ~std::uint64_t{0});
    } else {
      const std::uint32_t bits = dyadic_bits(epsilon);
      for (std::size_t k = 0; k < nw; ++k) flip_words[k] = dyadic_flip_word(bits, rng);
    }
    flip_words[nw - 1] &= tail_mask(n);
  }
}

McEstimate estimate(const ThresholdFunction& f, const NoiseParams& noise, std::uint64_t samples,
                    std::uint64_t seed, const McOptions& options) {
  check_samples(samples);
  const auto start = std::chrono::steady_clock::now();
  const int workers = resolve_workers(options.workers);
  const auto scheme = options.scheme.value_or(DecisionScheme::per_coordinate);
  const std::size_t n = f.size();
  const std::size_t nw = words_for(n);
  const auto w = f.weights();
  const double t = f.threshold();
  const double eps = noise.epsilon();
  const auto total = static_cast<std::int64_t>(samples);
  std::uint64_t count = 0;

#pragma omp parallel num_threads(workers) reduction(+ : count)
  {
    std::vector<std::uint64_t> xw(nw), fw(nw);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      draw_pair(n, eps, scheme, rng, xw.data(), fw.data());
      double s = 0.0, s_noisy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t xb = (xw[j / 64] >> (j % 64)) & 1U;
        const std::uint64_t yb = xb ^ ((fw[j / 64] >> (j % 64)) & 1U);
        s += xb ? w[j] : -w[j];
        s_noisy += yb ? w[j] : -w[j];
      }
      count += sign_of(s - t) != sign_of(s_noisy - t);
    }
  }
  return finish(count, samples, seed, workers, options.level, eps, McMethod::general, scheme, start);
}

McEstimate estimate_serial(const ThresholdFunction& f, const NoiseParams& noise,
                           std::uint64_t samples, std::uint64_t seed, const McOptions& options) {
  check_samples(samples);
  const auto start = std::chrono::steady_clock::now();
  const auto scheme = options.scheme.value_or(DecisionScheme::per_coordinate);
  const std::size_t n = f.size();
  const std::size_t nw = words_for(n);
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i);
    PackedPoint xp{n, std::vector<std::uint64_t>(nw)};
    for (auto& word : xp.words) word = rng.next();
    xp.words[nw - 1] &= tail_mask(n);
    const CubePoint x = unpack(xp);
    CubePoint y = x;
    if (scheme == DecisionScheme::per_coordinate) {
      y = apply_noise(x, noise, rng);
    } else {
      // Replay the stream from the start to get the same dyadic words.
      CounterRng replay(seed, i);
      std::vector<std::uint64_t> xw(nw), fw(nw);
      draw_pair(n, noise.epsilon(), scheme, replay, xw.data(), fw.data());
      std::vector<std::int8_t> yc(x.coordinates().begin(), x.coordinates().end());
      for (std::size_t j = 0; j < n; ++j)
        if ((fw[j / 64] >> (j % 64)) & 1U) yc[j] = static_cast<std::int8_t>(-yc[j]);
      y = CubePoint(std::move(yc));
    }
    count += evaluate(f, x) != evaluate(f, y);
  }
  return finish(count, samples, seed, 1, options.level, noise.epsilon(), McMethod::general, scheme,
                start);
}

McEstimate estimate_bitparallel(std::size_t n, double t, const NoiseParams& noise,
                                std::uint64_t samples, std::uint64_t seed,
                                const McOptions& options) {
  check_samples(samples);
  if (n < 1) throw InvalidArgument("n must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const int workers = resolve_workers(options.workers);
  const auto scheme = options.scheme.value_or(DecisionScheme::dyadic_words);
  const std::size_t nw = words_for(n);
  const double eps = noise.epsilon();
  const auto total = static_cast<std::int64_t>(samples);
  const auto nn = static_cast<std::int64_t>(n);
  std::uint64_t count = 0;

#pragma omp parallel num_threads(workers) reduction(+ : count)
  {
    std::vector<std::uint64_t> xw(nw), fw(nw);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      draw_pair(n, eps, scheme, rng, xw.data(), fw.data());
      std::int64_t ones = 0, ones_noisy = 0;
      for (std::size_t k = 0; k < nw; ++k) {
        ones += std::popcount(xw[k]);
        ones_noisy += std::popcount(xw[k] ^ fw[k]);
      }
      // Padding bits beyond n are zero in both words.
      const double s = static_cast<double>(2 * ones - nn);
      const double s_noisy = static_cast<double>(2 * ones_noisy - nn);
      count += sign_of(s - t) != sign_of(s_noisy - t);
    }
  }
  return finish(count, samples, seed, workers, options.level, eps, McMethod::bitparallel, scheme,
                start);
}

ThresholdFunction FamilySpec::function() const {
  if (is_simple()) return ThresholdFunction::simple_majority(n, threshold);
  return ThresholdFunction(weights, threshold);
}

std::string FamilySpec::weights_id() const {
  if (is_simple()) return "simple";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double w : weights) {
    const auto bits = std::bit_cast<std::uint64_t>(w);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t sweep_point_seed(std::uint64_t seed, double epsilon) {
  return mix64(seed ^ mix64(std::bit_cast<std::uint64_t>(epsilon)));
}

std::vector<SweepRow> sweep(const FamilySpec& family, const std::vector<double>& grid,
                            std::uint64_t samples, std::uint64_t seed, const SweepOptions& options) {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  const ThresholdFunction f = family.function();
  const bool fast = options.use_bitparallel && f.unit_weights();
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double eps : grid) {
    const NoiseParams noise(eps);
    const std::uint64_t point_seed = sweep_point_seed(seed, eps);
    McEstimate e = fast ? estimate_bitparallel(f.size(), f.threshold(), noise, samples, point_seed,
                                               options.mc)
                        : estimate(f, noise, samples, point_seed, options.mc);
    rows.push_back(SweepRow{family, eps, e});
  }
  return rows;
}

}  // namespace ltfnoise
