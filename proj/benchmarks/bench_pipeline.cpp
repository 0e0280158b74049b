#include <benchmark/benchmark.h>

#include "kincall/callgraph.hpp"
#include "kincall/kinclass.hpp"
#include "kincall/lifecourse.hpp"
#include "kincall/synth.hpp"

using namespace kincall;

namespace {

struct Fixture {
  Population population;
  Registry registry;
  DyadSet dyads;
};

const Fixture& world() {
  static const Fixture f = [] {
    SynthConfig c;
    c.n_families = 2000;
    Fixture out;
    out.population = generate_population(c);
    const PhoneHasher hasher("kincall");
    DyadAccumulator acc(hasher, TimeWindow::calendar_year(c.year));
    generate_calls(out.population, c, [&](const RawCallRecord& r) { acc.add(r); });
    out.dyads = acc.finish();
    out.registry = Registry(resolve_family_contracts(synth_registry(out.population, c, hasher)));
    return out;
  }();
  return f;
}

}  // namespace

static void BM_GenerateWorld(benchmark::State& state) {
  SynthConfig c;
  c.n_families = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const auto pop = generate_population(c);
    std::uint64_t calls = 0;
    generate_calls(pop, c, [&](const RawCallRecord&) { ++calls; });
    benchmark::DoNotOptimize(calls);
  }
}
BENCHMARK(BM_GenerateWorld)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_BuildGraph(benchmark::State& state) {
  const auto& w = world();
  for (auto _ : state) benchmark::DoNotOptimize(CallGraph::build(w.dyads, w.registry));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.dyads.size()));
}
BENCHMARK(BM_BuildGraph)->Unit(benchmark::kMillisecond);

static void BM_ClassifyGraph(benchmark::State& state) {
  const auto& w = world();
  const auto graph = CallGraph::build(w.dyads, w.registry);
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_graph(graph, SlotBounds{}, static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(graph.node_count()));
}
BENCHMARK(BM_ClassifyGraph)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_BuildTables(benchmark::State& state) {
  const auto& w = world();
  const auto assignments = classify_graph(CallGraph::build(w.dyads, w.registry), SlotBounds{}, 1);
  TableConfig tc;
  tc.min_cohort = 5;
  for (auto _ : state) benchmark::DoNotOptimize(build_tables(assignments, tc));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(assignments.size()));
}
BENCHMARK(BM_BuildTables)->Unit(benchmark::kMillisecond);
