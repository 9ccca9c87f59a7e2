#include <benchmark/benchmark.h>

#include <sstream>

#include "fixtures.hpp"

using namespace chunkstore;

static void BM_BuildDatastore(benchmark::State& state) {
  const auto& w = perf::workload(static_cast<std::size_t>(state.range(0)));
  std::uint64_t entries = 0;
  for (auto _ : state) {
    const auto ds = build_datastore(*w.model, w.pairs);
    entries += ds.entry_count();
  }
  state.counters["entries/s"] = benchmark::Counter(static_cast<double>(entries), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_BuildDatastore)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_AppendExamples(benchmark::State& state) {
  const auto& w = perf::workload(500);
  const std::vector<SentencePair> extra(w.pairs.begin(), w.pairs.begin() + 50);
  for (auto _ : state) {
    state.PauseTiming();
    Datastore ds = *w.ds;
    state.ResumeTiming();
    append_examples(ds, *w.model, extra);
    benchmark::DoNotOptimize(ds.entry_count());
  }
}
BENCHMARK(BM_AppendExamples)->Unit(benchmark::kMillisecond);

static void BM_SaveLoad(benchmark::State& state) {
  const auto& w = perf::workload(500);
  for (auto _ : state) {
    std::ostringstream out(std::ios::binary);
    w.ds->write(out);
    std::istringstream in(out.str(), std::ios::binary);
    benchmark::DoNotOptimize(Datastore::read(in));
  }
}
BENCHMARK(BM_SaveLoad)->Unit(benchmark::kMillisecond);

static void BM_DecoderStep(benchmark::State& state) {
  const auto& w = perf::workload(500);
  const auto ctx = w.model->encode(w.pairs[0].source);
  TokenSeq prefix{kBos};
  prefix.insert(prefix.end(), w.pairs[0].target.begin(), w.pairs[0].target.begin() + 3);
  for (auto _ : state) benchmark::DoNotOptimize(w.model->decoder_step(ctx, prefix));
}
BENCHMARK(BM_DecoderStep)->Unit(benchmark::kMicrosecond);
