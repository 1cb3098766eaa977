#include <benchmark/benchmark.h>

#include <random>

#include "simhaystack/corpus.hpp"
#include "simhaystack/hashbits.hpp"
#include "simhaystack/keypoints.hpp"
#include "simhaystack/matching.hpp"

using namespace simhaystack;

namespace {

BitHash random_hash(std::mt19937_64& gen, std::size_t bits) {
  BitHash h(bits);
  for (std::size_t i = 0; i < bits; ++i) {
    if (gen() & 1u) h.set(i);
  }
  return h;
}

void BM_Hamming(benchmark::State& state) {
  std::mt19937_64 gen(1);
  const auto bits = static_cast<std::size_t>(state.range(0));
  const BitHash a = random_hash(gen, bits);
  const BitHash b = random_hash(gen, bits);
  for (auto _ : state) benchmark::DoNotOptimize(hamming(a, b));
}
BENCHMARK(BM_Hamming)->Arg(64)->Arg(256)->Arg(1024);

// Linear nearest-neighbour scan over a database of random 64-bit hashes.
void BM_NearestScan(benchmark::State& state) {
  std::mt19937_64 gen(2);
  const Backend backend(BackendSpec::parse("dhash/64"));
  std::vector<DatabaseEntry> entries;
  for (int i = 0; i < state.range(0); ++i) {
    entries.push_back({"img" + std::to_string(i), Fingerprint{"dhash/64", random_hash(gen, 64)}});
  }
  const Database db("dhash/64", std::move(entries));
  const Fingerprint query{"dhash/64", random_hash(gen, 64)};
  const int jobs = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(nearest(backend, query, db, jobs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NearestScan)->Args({250, 1})->Args({2500, 1})->Args({25000, 1})->Args({25000, 0});

void BM_FeatureDistance(benchmark::State& state) {
  const FeatureSet a = extract_features(synthetic_scene(3, 320, 240));
  const FeatureSet b = extract_features(synthetic_scene(4, 320, 240));
  for (auto _ : state) benchmark::DoNotOptimize(feature_distance(a, b));
}
BENCHMARK(BM_FeatureDistance);

}  // namespace
