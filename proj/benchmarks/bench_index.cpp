#include <benchmark/benchmark.h>

#include "fixtures.hpp"

using namespace chunkstore;

static void BM_FlatSearch(benchmark::State& state) {
  const auto& w = perf::workload(static_cast<std::size_t>(state.range(0)));
  FlatIndex index(*w.ds);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(index.search(perf::query_for(w, i++), 8));
  state.counters["entries"] = static_cast<double>(w.ds->entry_count());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FlatSearch)->Arg(500)->Arg(5000)->Unit(benchmark::kMicrosecond);

static void BM_IvfSearch(benchmark::State& state) {
  const auto& w = perf::workload(5000);
  auto index = IvfIndex::build(*w.ds);
  if (state.range(0) > 0) index.set_nprobe(static_cast<std::uint32_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(index.search(perf::query_for(w, i++), 8));
  state.counters["nprobe"] = index.nprobe();
  state.counters["clusters"] = index.n_clusters();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_IvfSearch)->Arg(0)->Arg(1)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_IvfBuild(benchmark::State& state) {
  const auto& w = perf::workload(2000);
  for (auto _ : state) benchmark::DoNotOptimize(IvfIndex::build(*w.ds));
  state.counters["entries"] = static_cast<double>(w.ds->entry_count());
}
BENCHMARK(BM_IvfBuild)->Unit(benchmark::kMillisecond);

static void BM_CacheSearch(benchmark::State& state) {
  const auto& w = perf::workload(500);
  NeighborsCache cache(CacheScope::kSentenceLevel, w.ds->d_cache());
  std::vector<ChunkView> chunks;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    chunks.push_back(w.ds->chunk((static_cast<std::size_t>(i) * 131) % w.ds->entry_count()));
  }
  cache.insert_chunks(chunks, *w.ds);
  const auto s0 = w.ds->state(7);
  const std::vector<float> q(s0.begin(), s0.end());
  for (auto _ : state) benchmark::DoNotOptimize(cache.search(q, 8));
  state.counters["positions"] = static_cast<double>(cache.size());
}
// 8 neighbors for one hypothesis, then for a beam of 5.
BENCHMARK(BM_CacheSearch)->Arg(8)->Arg(40)->Unit(benchmark::kMicrosecond);
