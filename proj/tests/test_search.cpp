#include <gtest/gtest.h>

#include <cmath>

#include "ltfnoise/search.hpp"
#include "oracles.hpp"

using namespace ltfnoise;

TEST(Exhaustive, Majority3) {
  const auto r = search_exhaustive(3, NoiseParams(0.1), 3);
  EXPECT_EQ(r.method, "exhaustive");
  EXPECT_NEAR(r.baseline_simple_majority_p, 0.136, 1e-15);
  bool has_simple = false;
  for (const auto& c : r.near_optimal) has_simple |= c.weights == std::vector<std::int64_t>{1, 1, 1};
  EXPECT_GE(r.best.p, r.baseline_simple_majority_p - 1e-12);
  EXPECT_LE(r.best.p, 2 * std::sqrt(0.1));
  EXPECT_TRUE(r.bound_applies);
  EXPECT_NE(r.open_question.find("open"), std::string::npos);
  EXPECT_TRUE(has_simple || r.exceeds_baseline);
  // Evaluations: nondecreasing triples in [1,3] with gcd 1.
  EXPECT_EQ(r.evaluations, 8u);
}

TEST(Exhaustive, SingleVariable) {
  for (double eps : {0.05, 0.3}) {
    const auto r = search_exhaustive(1, NoiseParams(eps), 4);
    EXPECT_NEAR(r.best.p, eps, 1e-15);
    EXPECT_EQ(r.best.weights, std::vector<std::int64_t>{1});
  }
}

TEST(Exhaustive, TwoVariablesTiesVersusNoTies) {
  const NoiseParams noise(0.2);
  const auto r = search_exhaustive(2, noise, 2);
  ASSERT_EQ(r.evaluations, 2u);  // (1,1) and (1,2); (2,2) has gcd 2
  // (1,1): oracle by pair enumeration; (1,2) is a dictator on the heavier coordinate.
  const double p11 = oracle::p_pairs({1, 1}, 0, mpq_class(1, 5)).get_d();
  EXPECT_NEAR(r.baseline_simple_majority_p, p11, 1e-15);
  EXPECT_NEAR(std::max(p11, 0.2), r.best.p, 1e-15);
}

TEST(Exhaustive, WithThresholds) {
  ExhaustiveOptions opt;
  opt.include_thresholds = true;
  const auto r = search_exhaustive(3, NoiseParams(0.1), 2, opt);
  EXPECT_GT(r.evaluations, 4u);
  EXPECT_LE(r.best.p, 2 * std::sqrt(0.1));
  for (std::size_t i = 1; i < r.near_optimal.size(); ++i)
    EXPECT_FALSE(r.near_optimal[i].weights < r.near_optimal[i - 1].weights);
}

TEST(Exhaustive, Preconditions) {
  EXPECT_THROW(search_exhaustive(11, NoiseParams(0.1), 2), InvalidArgument);
  EXPECT_THROW(search_exhaustive(3, NoiseParams(0.1), 0), InvalidArgument);
}

TEST(Local, ExactObjectiveDominatesSimpleMajority) {
  const auto r = search_local(5, NoiseParams(0.1), 20, 17);
  EXPECT_GE(r.best.p, r.baseline_simple_majority_p - 1e-12);
  EXPECT_LE(r.best.p, 2 * std::sqrt(0.1));
  ASSERT_EQ(r.trajectories.size(), 20u);
  for (const auto& tr : r.trajectories)
    for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_GT(tr[i], tr[i - 1]);
  EXPECT_NE(r.open_question.find("open"), std::string::npos);
}

TEST(Local, Reproducible) {
  LocalSearchOptions a, b;
  a.workers = 1;
  b.workers = 3;
  const auto r1 = search_local(6, NoiseParams(0.15), 6, 99, a);
  const auto r2 = search_local(6, NoiseParams(0.15), 6, 99, b);
  EXPECT_EQ(r1.best.weights, r2.best.weights);
  EXPECT_EQ(r1.best.p, r2.best.p);
  EXPECT_EQ(r1.evaluations, r2.evaluations);
  EXPECT_EQ(r1.trajectories, r2.trajectories);
}

TEST(Local, MonteCarloObjective) {
  LocalSearchOptions opt;
  opt.objective = SearchObjective::montecarlo;
  opt.mc_samples = 5000;
  opt.max_iterations = 10;
  const auto r = search_local(7, NoiseParams(0.1), 3, 5, opt);
  EXPECT_EQ(r.objective, "montecarlo");
  EXPECT_LE(r.best.ci_low, 2 * std::sqrt(0.1));
  EXPECT_THROW(search_local(3, NoiseParams(0.1), 0, 1), InvalidArgument);
}

TEST(Ratio, SimpleFamily) {
  const auto rows = ratio_curve(201, {0.001, 0.01, 0.1}, RatioFamily::simple);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.source, "exact");
    EXPECT_LE(r.p_over_sqrt_eps, 2.0);
    EXPECT_NEAR(r.p_over_sqrt_eps, r.p / std::sqrt(r.epsilon), 1e-15);
  }
  EXPECT_THROW(ratio_curve(3, {0.6}, RatioFamily::simple), InvalidArgument);
}

TEST(Ratio, SingleVariableTendsToZero) {
  const auto rows = ratio_curve(1, {0.1, 0.01, 0.001}, RatioFamily::simple);
  for (const auto& r : rows) EXPECT_NEAR(r.p_over_sqrt_eps, std::sqrt(r.epsilon), 1e-12);
}

TEST(Ratio, BestFoundAtLeastSimple) {
  RatioOptions opt;
  opt.restarts = 3;
  const auto best = ratio_curve(5, {0.05, 0.2}, RatioFamily::best_found, opt);
  const auto simple = ratio_curve(5, {0.05, 0.2}, RatioFamily::simple, opt);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_GE(best[i].p, simple[i].p - 1e-12);
}
