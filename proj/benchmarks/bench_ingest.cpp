#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>

#include "kincall/cdr_ingest.hpp"
#include "kincall/phone_hash.hpp"

using namespace kincall;

namespace {

std::string make_stream(std::size_t records) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> phone(0, 49'999);
  std::uniform_int_distribution<int> sec(0, 86399);
  std::string out = "origin\tdestination\ttimestamp\tduration_sec\n";
  char line[96];
  for (std::size_t i = 0; i < records; ++i) {
    const auto a = phone(rng);
    const auto b = (a * 7 + phone(rng) % 12 + 1) % 50'000;
    const int s = sec(rng);
    const int n = std::snprintf(line, sizeof line, "569%08llu\t569%08llu\t2015-06-15T%02d:%02d:%02d\t%d\n",
                                static_cast<unsigned long long>(a), static_cast<unsigned long long>(b), s / 3600,
                                s / 60 % 60, s % 60, s % 600 + 1);
    out.append(line, static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace

static void BM_HashPhone(benchmark::State& state) {
  const PhoneHasher hasher("kincall");
  std::uint64_t i = 0;
  char buf[24];
  for (auto _ : state) {
    std::snprintf(buf, sizeof buf, "+56 9 %08llu", static_cast<unsigned long long>(i++ % 100'000'000));
    benchmark::DoNotOptimize(hasher.hash(buf));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_HashPhone);

static void BM_AggregateStream(benchmark::State& state) {
  const auto text = make_stream(static_cast<std::size_t>(state.range(0)));
  const PhoneHasher hasher("kincall");
  IngestOptions options;
  options.workers = static_cast<unsigned>(state.range(1));
  options.block_bytes = std::size_t{4} << 20;
  for (auto _ : state) {
    std::istringstream in(text);
    IngestReport report;
    benchmark::DoNotOptimize(aggregate_stream(in, hasher, options, report));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_AggregateStream)->Args({1'000'000, 1})->Args({1'000'000, 4})->Unit(benchmark::kMillisecond);

static void BM_DyadAccumulatorPreHashed(benchmark::State& state) {
  const PhoneHasher hasher("kincall");
  std::vector<HashedId> ids;
  for (int i = 0; i < 10'000; ++i) ids.push_back(hasher.hash_normalized(std::to_string(56900000000LL + i)));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  for (auto _ : state) {
    DyadAccumulator acc(hasher, TimeWindow::calendar_year(2015));
    for (int i = 0; i < 100'000; ++i) {
      const auto a = pick(rng);
      const auto b = (a + 1 + pick(rng) % 20) % ids.size();
      acc.add_call(ids[a], ids[b], 60);
    }
    benchmark::DoNotOptimize(acc.finish());
  }
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_DyadAccumulatorPreHashed)->Unit(benchmark::kMillisecond);
