#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "kincall/stats.hpp"

using namespace kincall::stats;

namespace {

std::pair<std::vector<double>, std::vector<double>> samples(std::size_t n, int distinct) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(0, distinct - 1);
  std::vector<double> a(n);
  std::vector<double> b(n);
  for (auto& x : a) x = d(rng);
  for (auto& x : b) x = d(rng) + 1;
  return {a, b};
}

}  // namespace

static void BM_KsTwoSample(benchmark::State& state) {
  const auto [a, b] = samples(static_cast<std::size_t>(state.range(0)), 1 << 20);
  for (auto _ : state) benchmark::DoNotOptimize(ks_two_sample(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KsTwoSample)->RangeMultiplier(10)->Range(100, 1'000'000)->Complexity();

static void BM_MannWhitneyTied(benchmark::State& state) {
  const auto [a, b] = samples(static_cast<std::size_t>(state.range(0)), 50);
  for (auto _ : state) benchmark::DoNotOptimize(mann_whitney_u(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MannWhitneyTied)->RangeMultiplier(10)->Range(100, 1'000'000)->Complexity();

static void BM_MannWhitneyExactSmall(benchmark::State& state) {
  const auto [a, b] = samples(static_cast<std::size_t>(state.range(0)), 1 << 20);
  for (auto _ : state) benchmark::DoNotOptimize(mann_whitney_u(a, b));
}
BENCHMARK(BM_MannWhitneyExactSmall)->Arg(5)->Arg(10)->Arg(20);

static void BM_WelchT(benchmark::State& state) {
  const auto [a, b] = samples(static_cast<std::size_t>(state.range(0)), 1 << 20);
  for (auto _ : state) benchmark::DoNotOptimize(welch_t_test(a, b));
}
BENCHMARK(BM_WelchT)->Arg(1000)->Arg(100'000);
BENCHMARK_MAIN();
