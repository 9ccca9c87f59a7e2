#include <benchmark/benchmark.h>

#include "fixtures.hpp"

using namespace chunkstore;

namespace {

std::vector<TokenSeq> sources(const perf::Workload& w, std::size_t n) {
  std::vector<TokenSeq> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(w.pairs[(i * 37) % w.pairs.size()].source);
  return out;
}

void run(benchmark::State& state, const DecodeConfig& config, bool with_index) {
  const auto& w = perf::workload(5000);
  FlatIndex index(*w.ds);
  const auto src = sources(w, 8);
  DecodeHooks hooks;
  hooks.threads = 1;
  std::uint64_t tokens = 0, searches = 0;
  for (auto _ : state) {
    const auto out = translate_batch(*w.model, with_index ? &index : nullptr, config, src, hooks);
    for (const auto& t : out) {
      tokens += t.stats.tokens;
      searches += t.stats.datastore_searches;
    }
  }
  state.counters["tok/s"] = benchmark::Counter(static_cast<double>(tokens), benchmark::Counter::kIsRate);
  state.counters["ds_searches/iter"] =
      static_cast<double>(searches) / static_cast<double>(state.iterations());
}

}  // namespace

static void BM_DecodeBase(benchmark::State& state) {
  DecodeConfig c;
  c.strategy = Strategy::base();
  run(state, c, false);
}
BENCHMARK(BM_DecodeBase)->Unit(benchmark::kMillisecond);

static void BM_DecodeVanilla(benchmark::State& state) {
  DecodeConfig c;
  c.strategy = Strategy::vanilla();
  run(state, c, true);
}
BENCHMARK(BM_DecodeVanilla)->Unit(benchmark::kMillisecond);

static void BM_DecodeMaintainOrder(benchmark::State& state) {
  DecodeConfig c;
  c.strategy = Strategy::maintain_order();
  c.schedule = ScheduleConfig::fixed(static_cast<std::uint32_t>(state.range(0)));
  run(state, c, true);
}
BENCHMARK(BM_DecodeMaintainOrder)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_DecodeCacheFixed(benchmark::State& state) {
  DecodeConfig c;
  c.strategy = Strategy::cache(CacheScope::kSentenceLevel);
  c.schedule = ScheduleConfig::fixed(static_cast<std::uint32_t>(state.range(0)));
  run(state, c, true);
}
BENCHMARK(BM_DecodeCacheFixed)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_DecodeCacheGeometric(benchmark::State& state) {
  DecodeConfig c;
  c.strategy = Strategy::cache(CacheScope::kSentenceLevel);
  c.schedule = ScheduleConfig::geometric(2, 16);
  run(state, c, true);
}
BENCHMARK(BM_DecodeCacheGeometric)->Unit(benchmark::kMillisecond);
