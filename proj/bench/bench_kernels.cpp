// Serial reference sweep against the OpenMP sweep, and one Monte Carlo batch
// run serially against the parallel run loop.

#include <benchmark/benchmark.h>

#include "oblique/experiment.hpp"
#include "oblique/graph.hpp"
#include "oblique/kernels.hpp"
#include "oblique/random.hpp"

using namespace oblique;

namespace {

NeighborOperator make_operator(Index nodes, Index block) {
  const Graph g = random_connected_graph(nodes, 0.25, 11);
  const SupportMask mask = block_expand(support_mask(g), std::vector<Index>(static_cast<std::size_t>(nodes), block));
  Rng rng(12);
  return NeighborOperator(standard_normal(mask.dim(), mask.dim(), rng), mask);
}

void sweep(benchmark::State& state, Execution exec) {
  const NeighborOperator op = make_operator(state.range(0), 5);
  Rng rng(13);
  const Vector in = standard_normal(op.dim(), rng);
  Vector out(op.dim());
  for (auto _ : state) {
    op.apply(in, out, exec);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_SweepSerial(benchmark::State& state) { sweep(state, Execution::Serial); }
void BM_SweepParallel(benchmark::State& state) { sweep(state, Execution::Parallel); }

void batch(benchmark::State& state, Execution exec) {
  ExperimentConfig cfg = preset_config("desk");
  cfg.runs = 4;
  cfg.iterations = 300;
  const Scenario sc = build_scenario(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(sc, cfg, exec));
}

void BM_RunsSerial(benchmark::State& state) { batch(state, Execution::Serial); }
void BM_RunsParallel(benchmark::State& state) { batch(state, Execution::Parallel); }

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(20)->Arg(50)->Arg(100);
BENCHMARK(BM_SweepParallel)->Arg(20)->Arg(50)->Arg(100);
BENCHMARK(BM_RunsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunsParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
