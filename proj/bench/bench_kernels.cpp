#include <benchmark/benchmark.h>

#include "ltfnoise/exact.hpp"
#include "ltfnoise/montecarlo.hpp"

using namespace ltfnoise;

namespace {

constexpr std::uint64_t kSamples = 100000;

void BM_EstimateSerial(benchmark::State& state) {
  const auto f = ThresholdFunction::simple_majority(static_cast<std::size_t>(state.range(0)));
  const NoiseParams noise(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_serial(f, noise, kSamples, 7).disagreements);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kSamples));
}
BENCHMARK(BM_EstimateSerial)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EstimateParallel(benchmark::State& state) {
  const auto f = ThresholdFunction::simple_majority(static_cast<std::size_t>(state.range(0)));
  const NoiseParams noise(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(f, noise, kSamples, 7).disagreements);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kSamples));
}
BENCHMARK(BM_EstimateParallel)->Arg(64)->Arg(1001)->Unit(benchmark::kMillisecond);

void BM_EstimateDyadic(benchmark::State& state) {
  const auto f = ThresholdFunction::simple_majority(static_cast<std::size_t>(state.range(0)));
  const NoiseParams noise(0.1);
  McOptions opt;
  opt.scheme = DecisionScheme::dyadic_words;
  for (auto _ : state) benchmark::DoNotOptimize(estimate(f, noise, kSamples, 7, opt).disagreements);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kSamples));
}
BENCHMARK(BM_EstimateDyadic)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Bitparallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const NoiseParams noise(0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_bitparallel(n, 0.0, noise, kSamples, 7).disagreements);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kSamples));
}
BENCHMARK(BM_Bitparallel)->Arg(64)->Arg(1001)->Unit(benchmark::kMillisecond);

void BM_ExactEnum(benchmark::State& state) {
  const auto f = ThresholdFunction({1, 2, 3, 4, 5, 6, 7, 8, 1, 2}, 0.0);
  const NoiseParams noise(1, 10);
  for (auto _ : state) benchmark::DoNotOptimize(p_exact_enum(f, noise).p);
}
BENCHMARK(BM_ExactEnum)->Unit(benchmark::kMillisecond);

void BM_ExactDp(benchmark::State& state) {
  const auto f = ThresholdFunction::simple_majority(static_cast<std::size_t>(state.range(0)));
  const NoiseParams noise(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(p_exact_dp(f, noise).p);
}
BENCHMARK(BM_ExactDp)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
