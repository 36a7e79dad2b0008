#include <gtest/gtest.h>

#include <cmath>

#include "ltfnoise/bounds.hpp"
#include "ltfnoise/montecarlo.hpp"
#include "oracles.hpp"

using namespace ltfnoise;

namespace {

bool covers(const McEstimate& e, double p) { return e.ci_low <= p && p <= e.ci_high; }

}  // namespace

TEST(Wilson, KnownValues) {
  EXPECT_NEAR(normal_two_sided_z(0.99), 2.5758293035489, 1e-9);
  EXPECT_NEAR(normal_two_sided_z(0.95), 1.9599639845401, 1e-9);
  // 50/100 at 95%: center 0.5, half-width z sqrt(0.25/100 + z^2/40000) / (1 + z^2/100).
  const auto ci = wilson_interval(50, 100, 0.95);
  const double z = 1.9599639845401;
  const double half = z * std::sqrt(0.0025 + z * z / 40000) / (1 + z * z / 100);
  EXPECT_NEAR(ci.low, 0.5 - half, 1e-12);
  EXPECT_NEAR(ci.high, 0.5 + half, 1e-12);
  const auto zero = wilson_interval(0, 1000, 0.99);
  EXPECT_EQ(zero.low, 0.0);
  EXPECT_GT(zero.high, 0.0);
  EXPECT_THROW(wilson_interval(0, 0, 0.99), InvalidArgument);
  EXPECT_THROW(normal_two_sided_z(1.0), InvalidArgument);
}

TEST(Dyadic, Epsilon) {
  EXPECT_EQ(dyadic_epsilon(0.25), 0.25);
  EXPECT_EQ(dyadic_epsilon(1.0), 1.0);
  EXPECT_EQ(dyadic_epsilon(0.0), 0.0);
  EXPECT_LE(dyadic_epsilon(0.1), 0.1);
  EXPECT_GT(dyadic_epsilon(0.1), 0.1 - std::ldexp(1.0, -32));
}

TEST(Dyadic, FlipFrequencyMatchesRealizedEpsilon) {
  for (double eps : {0.1, 0.25, 0.37}) {
    std::vector<std::uint64_t> xw(2), fw(2);
    std::uint64_t ones = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
      CounterRng rng(5, static_cast<std::uint64_t>(i));
      draw_pair(100, eps, DecisionScheme::dyadic_words, rng, xw.data(), fw.data());
      ones += static_cast<std::uint64_t>(std::popcount(fw[0]) + std::popcount(fw[1]));
      ASSERT_EQ(fw[1] >> 36, 0u);
    }
    const double trials = 100.0 * draws;
    const double sd = std::sqrt(trials * eps * (1 - eps));
    EXPECT_NEAR(static_cast<double>(ones), trials * dyadic_epsilon(eps), 5 * sd) << eps;
  }
}

TEST(Estimate, SingleVariable) {
  const auto e = estimate(ThresholdFunction({1}, 0), NoiseParams(0.3), 1'000'000, 1);
  EXPECT_TRUE(covers(e, 0.3));
  EXPECT_EQ(e.method, McMethod::general);
  EXPECT_EQ(e.scheme, DecisionScheme::per_coordinate);
}

TEST(Estimate, Majority3) {
  const auto e = estimate(ThresholdFunction::simple_majority(3), NoiseParams(0.1), 1'000'000, 2);
  EXPECT_TRUE(covers(e, 0.136)) << e.ci_low << " " << e.ci_high;
  EXPECT_NEAR(e.std_error, std::sqrt(e.p_hat * (1 - e.p_hat) / 1e6), 1e-15);
}

TEST(Estimate, SerialReferenceMatchesParallel) {
  const ThresholdFunction f({3, -1, 2, 2, 5, 1, 1}, 1);
  for (auto scheme : {DecisionScheme::per_coordinate, DecisionScheme::dyadic_words}) {
    McOptions opt;
    opt.scheme = scheme;
    const auto a = estimate(f, NoiseParams(0.2), 20000, 3, opt);
    const auto b = estimate_serial(f, NoiseParams(0.2), 20000, 3, opt);
    EXPECT_EQ(a.disagreements, b.disagreements);
  }
}

TEST(Estimate, WorkerCountDoesNotChangeResult) {
  const auto f = ThresholdFunction::simple_majority(65);
  std::uint64_t ref = 0;
  for (int workers : {1, 2, 3, 7}) {
    McOptions opt;
    opt.workers = workers;
    const auto a = estimate(f, NoiseParams(0.05), 30000, 4, opt);
    const auto b = estimate_bitparallel(65, 0, NoiseParams(0.05), 30000, 4, opt);
    if (workers == 1) ref = a.disagreements;
    EXPECT_EQ(a.disagreements, ref);
    EXPECT_EQ(a.workers, workers);
    EXPECT_GT(b.disagreements, 0u);
  }
}

TEST(Bitparallel, SharedDecisionsGiveIdenticalCounts) {
  for (std::size_t n : {1u, 5u, 63u, 64u}) {
    for (double t : {0.0, 1.0, -2.5}) {
      McOptions opt;
      opt.scheme = DecisionScheme::dyadic_words;
      const auto f = ThresholdFunction::simple_majority(n, t);
      const auto a = estimate(f, NoiseParams(0.1), 50000, 9, opt);
      const auto b = estimate_bitparallel(n, t, NoiseParams(0.1), 50000, 9);
      EXPECT_EQ(a.disagreements, b.disagreements) << n << " " << t;
      opt.scheme = DecisionScheme::per_coordinate;
      EXPECT_EQ(estimate(f, NoiseParams(0.1), 50000, 9, opt).disagreements,
                estimate_bitparallel(n, t, NoiseParams(0.1), 50000, 9, opt).disagreements);
    }
  }
}

TEST(Bitparallel, ZeroNoise) {
  const auto e = estimate_bitparallel(101, 0, NoiseParams(0.0), 10000, 1);
  EXPECT_EQ(e.p_hat, 0.0);
  EXPECT_EQ(e.disagreements, 0u);
}

TEST(Bitparallel, RealizedEpsilonIsReported) {
  const auto e = estimate_bitparallel(11, 0, NoiseParams(0.1), 1000, 1);
  EXPECT_EQ(e.realized_epsilon, dyadic_epsilon(0.1));
  EXPECT_EQ(e.scheme, DecisionScheme::dyadic_words);
}

TEST(Bitparallel, LargeMajorityNearSheppard) {
  const double target = sheppard(NoiseParams(0.01)).p;
  const auto e = estimate_bitparallel(10001, 0, NoiseParams(0.01), 200'000, 3);
  EXPECT_LE(std::abs(e.p_hat - target), 3 * e.std_error + 0.005);
}

TEST(Estimate, RejectsZeroSamples) {
  EXPECT_THROW(estimate(ThresholdFunction({1}, 0), NoiseParams(0.1), 0, 1), InvalidArgument);
  EXPECT_THROW(estimate_bitparallel(3, 0, NoiseParams(0.1), 0, 1), InvalidArgument);
}

TEST(Sweep, SingleVariableGrid) {
  const auto rows = sweep(FamilySpec::simple(1), {0.1, 0.2}, 200000, 5);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(covers(rows[0].estimate, 0.1));
  EXPECT_TRUE(covers(rows[1].estimate, 0.2));
  EXPECT_EQ(rows[0].estimate.method, McMethod::bitparallel);
}

TEST(Sweep, HalfNoiseOddMajority) {
  const auto rows = sweep(FamilySpec::simple(7), {0.5}, 200000, 5);
  EXPECT_TRUE(covers(rows[0].estimate, 0.5));
}

TEST(Sweep, IncreasingInEpsilonAndPointReproducible) {
  const auto rows = sweep(FamilySpec::simple(1001), {0.001, 0.01, 0.1}, 100000, 8);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LT(rows[0].estimate.p_hat, rows[1].estimate.p_hat);
  EXPECT_LT(rows[1].estimate.p_hat, rows[2].estimate.p_hat);
  for (const auto& r : rows) {
    EXPECT_LE(std::abs(r.estimate.p_hat - sheppard(NoiseParams(r.epsilon)).p),
              3 * r.estimate.std_error + 0.005);
    EXPECT_LE(r.estimate.ci_low, 2 * std::sqrt(r.epsilon));
  }
  const auto single = sweep(FamilySpec::simple(1001), {0.01}, 100000, 8);
  EXPECT_EQ(single[0].estimate.disagreements, rows[1].estimate.disagreements);
  EXPECT_THROW(sweep(FamilySpec::simple(3), {}, 10, 1), InvalidArgument);
}

TEST(Sweep, ExplicitWeightsUseGeneralPath) {
  const auto fam = FamilySpec::explicit_weights({1, 2, 3});
  EXPECT_EQ(fam.weights_id().size(), 16u);
  EXPECT_NE(fam.weights_id(), FamilySpec::explicit_weights({1, 2, 4}).weights_id());
  const auto rows = sweep(fam, {0.2}, 1000, 1);
  EXPECT_EQ(rows[0].estimate.method, McMethod::general);
}
