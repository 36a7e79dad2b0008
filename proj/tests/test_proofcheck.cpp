#include <gtest/gtest.h>

#include <random>

#include "ltfnoise/exact.hpp"
#include "ltfnoise/proofcheck.hpp"
#include "oracles.hpp"

using namespace ltfnoise;

TEST(Keypoint, Cases) {
  const auto zero = check_keypoint(0, 2.5);
  EXPECT_EQ(zero.lhs, 0);
  EXPECT_EQ(zero.rhs, 0.0);
  const auto inner = check_keypoint(1, 3);
  EXPECT_EQ(inner.lhs, 0);
  EXPECT_EQ(inner.rhs, 0.0);
  const auto outer = check_keypoint(2, 1);
  EXPECT_EQ(outer.lhs, 1);
  EXPECT_EQ(outer.rhs, 1.0);
  EXPECT_TRUE(check_keypoint(-1.5, 1.5).equal);
  EXPECT_TRUE(check_keypoint(0, 0).equal);
}

TEST(Keypoint, GridAndRandom) {
  for (int a = -6; a <= 6; ++a)
    for (int b = -6; b <= 6; ++b) EXPECT_TRUE(check_keypoint(a / 2.0, b / 2.0).equal) << a << "," << b;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 20000; ++i) ASSERT_TRUE(check_keypoint(u(gen), u(gen)).equal);
}

TEST(Keypoint, InjectedFaultIsDetected) {
  EXPECT_FALSE(check_keypoint(2, 1, 0.5).equal);
}

TEST(Partition, TraceInvariants) {
  const ThresholdFunction f({3, -1, 2, 2, 1, 4, 1}, 0);
  const NoiseParams noise(0.15);
  for (std::uint64_t s = 0; s < 2000; ++s) {
    CounterRng rng(7, s);
    const auto tr = sample_partition(f, noise, rng);
    ASSERT_EQ(tr.m, 6);
    ASSERT_EQ(tr.blocks.size(), 7u);
    std::vector<int> seen(7, 0);
    for (const auto& b : tr.blocks)
      for (auto i : b) ++seen[i];
    for (int c : seen) ASSERT_EQ(c, 1);
    double wx = 0;
    for (std::size_t i = 0; i < 7; ++i) wx += f.weights()[i] * tr.x[i];
    ASSERT_DOUBLE_EQ(tr.total(), wx);
    ASSERT_DOUBLE_EQ(tr.y1, wx - tr.block_sums[1]);
    ASSERT_LE(tr.b_lambda, static_cast<std::int64_t>(tr.lambda.size()));
  }
}

TEST(Partition, LabelLaw) {
  const ThresholdFunction f = ThresholdFunction::simple_majority(10);
  const NoiseParams noise(0.3);  // m = 3, P(tau = 0) = 0.1
  std::vector<double> counts(4, 0);
  const int draws = 20000;
  for (int s = 0; s < draws; ++s) {
    CounterRng rng(3, static_cast<std::uint64_t>(s));
    for (int t : sample_partition(f, noise, rng).tau) counts[static_cast<std::size_t>(t)] += 1;
  }
  const double total = 10.0 * draws;
  const double expect[] = {0.1, 0.3, 0.3, 0.3};
  for (int j = 0; j < 4; ++j) {
    const double sd = std::sqrt(total * expect[j] * (1 - expect[j]));
    EXPECT_NEAR(counts[j], total * expect[j], 5 * sd) << j;
  }
}

TEST(Partition, Preconditions) {
  CounterRng rng(1, 1);
  EXPECT_THROW(sample_partition(ThresholdFunction({1, 1}, 0), NoiseParams(0.0), rng), InvalidArgument);
  EXPECT_THROW(sample_partition(ThresholdFunction({1, 1}, 1), NoiseParams(0.1), rng), InvalidArgument);
}

TEST(Pointwise, PositiveSignIsIdentity) {
  std::mt19937_64 gen(2);
  for (std::uint64_t s = 0; s < 5000; ++s) {
    const auto w = oracle::random_weights(gen, 1 + s % 8, 5);
    const ThresholdFunction f(oracle::as_double(w), 0);
    CounterRng rng(11, s);
    const auto tr = sample_partition(f, NoiseParams(0.12), rng);
    const Sign sg = sign_of(tr.total());
    const auto c = check_pointwise_inequality(tr, sg);
    ASSERT_TRUE(c.holds);
    if (sg == Sign::positive) {
      ASSERT_DOUBLE_EQ(c.lhs, static_cast<double>(tr.b_lambda) - tr.lambda.size() / 2.0);
    }
  }
}

TEST(MadMonotone, Examples) {
  EXPECT_TRUE(check_mad_monotone(2));
  EXPECT_TRUE(check_mad_monotone(4));
  EXPECT_TRUE(check_mad_monotone(200));
  EXPECT_THROW(check_mad_monotone(1), InvalidArgument);
}

TEST(Tight, Statistical) {
  const auto a = check_tight(ThresholdFunction::simple_majority(3), NoiseParams(0.1), 400000, 1);
  EXPECT_TRUE(a.passed) << a.ci_low << " " << a.ci_high;
  EXPECT_NEAR(a.target, 0.136, 1e-15);
  const auto b = check_tight(ThresholdFunction({1}, 0), NoiseParams(0.3), 400000, 2);
  EXPECT_TRUE(b.passed);
  const auto c = check_tight(ThresholdFunction::simple_majority(4), NoiseParams(0.25), 400000, 3);
  EXPECT_TRUE(c.passed);
  EXPECT_DOUBLE_EQ(c.target, p_exact_dp(ThresholdFunction::simple_majority(4), NoiseParams(0.25)).p);
}

TEST(Tight, ExactEnumeration) {
  const auto a = check_tight_exact(ThresholdFunction::simple_majority(3), NoiseParams(1, 4));
  EXPECT_TRUE(a.equal);
  EXPECT_EQ(a.p, oracle::p_pairs({1, 1, 1}, 0, mpq_class(1, 4)));
  const auto b = check_tight_exact(ThresholdFunction({1, 2, 3, 4}, 0), NoiseParams(1, 3));
  EXPECT_TRUE(b.equal);
  EXPECT_EQ(b.expectation, oracle::p_pairs({1, 2, 3, 4}, 0, mpq_class(1, 3)));
  // eps = 2/7 gives m = 3 with P(tau = 0) = 1/7.
  EXPECT_TRUE(check_tight_exact(ThresholdFunction({2, 1, 1}, 0), NoiseParams(2, 7)).equal);
  EXPECT_THROW(check_tight_exact(ThresholdFunction::simple_majority(3), NoiseParams(0.25)), InvalidArgument);
}

TEST(SetupLaw, CoversExactP) {
  const auto c = check_setup_law(ThresholdFunction({1, 2, 3, 4}, 0), NoiseParams(1, 3), 200000, 4);
  EXPECT_TRUE(c.passed) << c.estimate << " vs " << c.target;
}

TEST(LambdaAveraging, BelowFullMad) {
  const auto c = check_lambda_averaging(ThresholdFunction::simple_majority(6), NoiseParams(0.1), 100000, 5);
  EXPECT_TRUE(c.passed);
  EXPECT_LE(c.estimate, c.target + 0.01);
}

TEST(Verification, QuickRunPasses) {
  VerifyConfig cfg;
  cfg.tight_draws = 100000;
  cfg.pointwise_traces = 10000;
  cfg.setup_draws = 50000;
  cfg.keypoint_random_pairs = 10000;
  const auto r = run_verification(cfg);
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.instance << " " << c.detail;
  EXPECT_TRUE(r.all_passed());
  EXPECT_GE(r.checks.size(), 10u);
}

TEST(Verification, KeypointOnlyAndFault) {
  VerifyConfig cfg;
  cfg.keypoint_only = true;
  cfg.keypoint_random_pairs = 1000;
  EXPECT_TRUE(run_verification(cfg).all_passed());
  cfg.inject_fault = true;
  EXPECT_FALSE(run_verification(cfg).all_passed());
}

TEST(Verification, RejectsNonzeroThresholdInstance) {
  VerifyConfig cfg;
  cfg.instances.emplace_back(ThresholdFunction({1, 1, 1}, 1), NoiseParams(0.1));
  EXPECT_THROW(run_verification(cfg), InvalidArgument);
}
