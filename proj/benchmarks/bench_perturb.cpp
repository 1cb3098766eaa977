#include <benchmark/benchmark.h>

#include "simhaystack/corpus.hpp"
#include "simhaystack/perturb.hpp"

using namespace simhaystack;

namespace {

void BM_Suite(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const RasterImage img = synthetic_scene(7, side, side);
  for (auto _ : state) benchmark::DoNotOptimize(generate_suite("bench.png", img, 1));
}
BENCHMARK(BM_Suite)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Single(benchmark::State& state) {
  const RasterImage img = synthetic_scene(8, 256, 256);
  const auto specs = suite_specs("bench.png", 1);
  const auto& s = specs[static_cast<std::size_t>(state.range(0))];
  state.SetLabel(s.name());
  for (auto _ : state) benchmark::DoNotOptimize(apply(s, img));
}
BENCHMARK(BM_Single)->DenseRange(0, 57, 1)->Unit(benchmark::kMicrosecond);

}  // namespace
