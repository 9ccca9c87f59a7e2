#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chunkstore/cache.hpp"
#include "chunkstore/index.hpp"
#include "chunkstore/model.hpp"
#include "chunkstore/prob_dist.hpp"
#include "chunkstore/schedule.hpp"
#include "chunkstore/types.hpp"

namespace chunkstore {

enum class StrategyKind {
  kBase,           // parametric model only
  kVanillaKnn,     // datastore search at every step, first chunk token only
  kMaintainOrder,  // j-th chunk token at offset j from the retrieval step
  kCache,          // neighbors' cache between retrieval steps
};

struct Strategy {
  StrategyKind kind = StrategyKind::kCache;
  CacheScope scope = CacheScope::kSentenceLevel;  // kCache only

  static Strategy base() { return {StrategyKind::kBase, CacheScope::kSentenceLevel}; }
  static Strategy vanilla() { return {StrategyKind::kVanillaKnn, CacheScope::kSentenceLevel}; }
  static Strategy maintain_order() {
    return {StrategyKind::kMaintainOrder, CacheScope::kSentenceLevel};
  }
  static Strategy cache(CacheScope scope) { return {StrategyKind::kCache, scope}; }

  /// "base", "vanilla", "maintain_order", "cache:<scope>".
  std::string describe() const;
  bool operator==(const Strategy&) const = default;
};

std::optional<Strategy> parse_strategy(const std::string& text);

struct DecodeConfig {
  std::uint32_t beam_size = 5;
  std::uint32_t max_len = 200;
  std::uint32_t max_source_len = 1024;
  std::uint32_t batch_size = 8;
  MixParams mix;
  ScheduleConfig schedule;
  Strategy strategy;
  std::optional<std::size_t> cache_capacity;

  void validate() const;
};

/// Per-sentence counters. Search counters count retrieval events per
/// hypothesis slot (one per step at which search happened); the *_queries
/// counters count every individual search issued across the beam.
struct DecodeStats {
  std::uint64_t tokens = 0;  // emitted target tokens, EOS included
  std::uint64_t steps = 0;   // beam-search steps executed
  std::uint64_t datastore_searches = 0;
  std::uint64_t datastore_queries = 0;
  std::uint64_t cache_searches = 0;
  std::uint64_t cache_queries = 0;
  double wall_ms = 0.0;

  double tokens_per_sec() const;
  DecodeStats& operator+=(const DecodeStats& other);
};

struct Translation {
  TokenSeq tokens;  // without BOS / EOS
  double score = 0.0;
  bool finished = false;  // ended with EOS
  DecodeStats stats;
};

enum class QuerySpace { kKey, kCache };

/// Centers and projects a raw decoder state with the datastore's key or
/// cache PCA. Throws DimensionMismatch.
StateVector query_vector(std::span<const float> state, QuerySpace space, const Datastore& ds);

/// Neighbors retrieved at one datastore step, kept by a hypothesis so later
/// steps can read subsequent chunk positions with the same distances.
struct RetrievedChunks {
  std::uint64_t position = 0;  // retrieval step t_k
  std::uint32_t width = 0;     // chunk positions kept per neighbor
  std::vector<double> distances;
  std::vector<TokenId> tokens;  // neighbors x width, row-major

  std::size_t size() const noexcept { return distances.size(); }

  static RetrievedChunks gather(std::span<const Neighbor> neighbors, const Datastore& ds,
                                std::uint64_t position, std::uint32_t width);
};

/// Retrieval distribution over the `offset`-th token of each retrieved chunk,
/// interpolated into p_model. PAD tokens are dropped before the softmax;
/// when none survive, or offset >= width, p_model is returned unchanged.
ProbDist chunk_offset_distribution(const ProbDist& p_model, const RetrievedChunks& chunks,
                                   std::size_t offset, double lambda, double temp);

/// Cache lookup for a non-retrieval step: top-k cache entries, softmax with
/// `temp`, interpolation with `lambda`. An empty cache yields p_model.
ProbDist cache_step_distribution(const ProbDist& p_model, const NeighborsCache& cache,
                                 std::span<const float> cache_query, std::size_t k,
                                 double lambda, double temp);

struct StepInputs {
  const ProbDist* p_model = nullptr;
  bool retrieval_step = false;
  std::uint64_t position = 0;
  /// Chunks from the most recent datastore search of this hypothesis.
  const RetrievedChunks* chunks = nullptr;
  const NeighborsCache* cache = nullptr;
  std::span<const float> cache_query;
};

struct StepResult {
  ProbDist dist;
  bool used_cache = false;
};

/// The final next-token distribution of one hypothesis under `strategy`.
StepResult step_distribution(const Strategy& strategy, const MixParams& mix,
                             const StepInputs& inputs);

/// Observation of one hypothesis' step; for tests and diagnostics.
struct StepTrace {
  std::size_t sentence = 0;
  std::uint64_t position = 0;
  std::size_t hypothesis = 0;
  bool retrieval_step = false;
  bool used_cache = false;
  const TokenSeq* prefix = nullptr;
  const StateVector* state = nullptr;
  const ProbDist* p_model = nullptr;
  const ProbDist* dist = nullptr;
  const NeighborsCache* cache = nullptr;  // cache consulted this step, if any
};

struct DecodeHooks {
  std::function<void(const StepTrace&)> on_step;
  /// Worker threads for independent batches; 0 means thread_count().
  /// Hooks are invoked from worker threads when this exceeds 1.
  std::size_t threads = 1;
};

/// Beam search (length-unnormalized) over `sources`, in batches of
/// config.batch_size. `index` may be null only for the BASE strategy.
std::vector<Translation> translate_batch(const ModelInterface& model, const Index* index,
                                         const DecodeConfig& config,
                                         std::span<const TokenSeq> sources,
                                         const DecodeHooks& hooks = {});

}  // namespace chunkstore
