#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chunkstore/datastore.hpp"
#include "chunkstore/index.hpp"

namespace chunkstore {

enum class CacheScope {
  kSingleChunk,    // one cache per beam hypothesis, reset at each retrieval step
  kBeamBatch,      // shared by all hypotheses of a batch, reset at each retrieval step
  kSentenceLevel,  // shared, accumulates across retrieval steps of a batch
};

std::string_view to_string(CacheScope scope);
std::optional<CacheScope> parse_cache_scope(std::string_view name);

/// The neighbors' cache: (cache-reduced state, token) pairs for every
/// non-PAD position of the chunks retrieved so far.
class NeighborsCache {
 public:
  struct Entry {
    std::span<const float> key;
    TokenId value;
    std::uint32_t origin;
  };

  NeighborsCache(CacheScope scope, std::uint32_t dim,
                 std::optional<std::size_t> capacity = std::nullopt);

  CacheScope scope() const noexcept { return scope_; }
  std::uint32_t dim() const noexcept { return dim_; }
  std::optional<std::size_t> capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  Entry entry(std::size_t i) const;

  /// Inserts every non-PAD chunk position. Under kSingleChunk and kBeamBatch
  /// the entries previously inserted by `origin` are dropped first; under
  /// kSentenceLevel entries accumulate. With a capacity set, the oldest
  /// entries are evicted first. `max_positions` truncates each chunk.
  /// Throws SentinelDereference for a non-PAD position without a state.
  void insert_chunks(std::span<const ChunkView> chunks, const Datastore& ds,
                     std::uint32_t origin = 0,
                     std::size_t max_positions = static_cast<std::size_t>(-1));

  /// Exact top-min(k, size) by squared L2; ties by insertion order. The
  /// returned ids are positions in insertion order. Throws EmptyCache.
  std::vector<Neighbor> search(std::span<const float> query, std::size_t k) const;

  void reset() noexcept;

 private:
  void evict_front(std::size_t n);
  void erase_origin(std::uint32_t origin);

  CacheScope scope_;
  std::uint32_t dim_;
  std::optional<std::size_t> capacity_;
  std::vector<float> keys_;
  std::vector<TokenId> values_;
  std::vector<std::uint32_t> origins_;
};

}  // namespace chunkstore
