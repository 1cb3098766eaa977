#include <benchmark/benchmark.h>

#include "simhaystack/blockhash.hpp"
#include "simhaystack/corpus.hpp"
#include "simhaystack/keypoints.hpp"

using namespace simhaystack;

namespace {

const RasterImage& scene() {
  static const RasterImage img = synthetic_scene(42, 481, 321);
  return img;
}

void BM_Ahash(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ahash(scene(), static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Ahash)->Arg(64)->Arg(256);

void BM_Dhash(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dhash(scene(), static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Dhash)->Arg(64)->Arg(256);

void BM_Phash(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(phash(scene(), static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Phash)->Arg(64)->Arg(256);

void BM_Whash(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(whash(scene(), static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Whash)->Arg(64)->Arg(256);

void BM_CropResistant(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(crop_resistant_hash(scene(), 64));
}
BENCHMARK(BM_CropResistant);

void BM_Orb(benchmark::State& state) {
  OrbParams params;
  params.max_features = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(scene(), params));
}
BENCHMARK(BM_Orb)->Arg(30)->Arg(500);

}  // namespace
