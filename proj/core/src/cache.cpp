#include "chunkstore/cache.hpp"

#include <algorithm>
#include <string>

#include "chunkstore/distance.hpp"
#include "chunkstore/error.hpp"

namespace chunkstore {

std::string_view to_string(CacheScope scope) {
  switch (scope) {
    case CacheScope::kSingleChunk: return "single_chunk";
    case CacheScope::kBeamBatch: return "beam_batch";
    case CacheScope::kSentenceLevel: return "sentence_level";
  }
  return "unknown";
}

std::optional<CacheScope> parse_cache_scope(std::string_view name) {
  if (name == "single_chunk") return CacheScope::kSingleChunk;
  if (name == "beam_batch") return CacheScope::kBeamBatch;
  if (name == "sentence_level") return CacheScope::kSentenceLevel;
  return std::nullopt;
}

NeighborsCache::NeighborsCache(CacheScope scope, std::uint32_t dim,
                               std::optional<std::size_t> capacity)
    : scope_(scope), dim_(dim), capacity_(capacity) {
  if (dim_ == 0) throw Error(Errc::kInvalidArgument, "cache key dimension must be positive");
  if (capacity_ && *capacity_ == 0) throw Error(Errc::kInvalidArgument, "cache capacity of 0");
}

NeighborsCache::Entry NeighborsCache::entry(std::size_t i) const {
  return {{keys_.data() + i * dim_, dim_}, values_.at(i), origins_[i]};
}

void NeighborsCache::insert_chunks(std::span<const ChunkView> chunks, const Datastore& ds,
                                   std::uint32_t origin, std::size_t max_positions) {
  if (ds.d_cache() != dim_) {
    throw Error(Errc::kDimensionMismatch, "datastore cache states have dimension " +
                                              std::to_string(ds.d_cache()));
  }
  if (scope_ != CacheScope::kSentenceLevel) erase_origin(origin);
  for (const ChunkView& chunk : chunks) {
    const std::size_t n = std::min(chunk.size(), max_positions);
    for (std::size_t i = 0; i < n; ++i) {
      if (chunk.tokens[i] == kPad) continue;
      if (chunk.state_refs[i] == kPadStateRef) {
        throw Error(Errc::kSentinelDereference, "non-PAD chunk position without a state");
      }
      const auto state = ds.state(chunk.state_refs[i]);
      keys_.insert(keys_.end(), state.begin(), state.end());
      values_.push_back(chunk.tokens[i]);
      origins_.push_back(origin);
    }
  }
  if (capacity_ && values_.size() > *capacity_) evict_front(values_.size() - *capacity_);
}

std::vector<Neighbor> NeighborsCache::search(std::span<const float> query, std::size_t k) const {
  if (values_.empty()) throw Error(Errc::kEmptyCache, "neighbors' cache is empty");
  if (query.size() != dim_) {
    throw Error(Errc::kDimensionMismatch, "cache query has dimension " +
                                              std::to_string(query.size()));
  }
  if (k == 0) throw Error(Errc::kInvalidArgument, "k must be >= 1");
  std::vector<Neighbor> all(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    all[i] = {i, sq_l2(query, {keys_.data() + i * dim_, dim_})};
  }
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
                    });
  all.resize(n);
  return all;
}

void NeighborsCache::reset() noexcept {
  keys_.clear();
  values_.clear();
  origins_.clear();
}

void NeighborsCache::evict_front(std::size_t n) {
  keys_.erase(keys_.begin(), keys_.begin() + static_cast<std::ptrdiff_t>(n * dim_));
  values_.erase(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n));
  origins_.erase(origins_.begin(), origins_.begin() + static_cast<std::ptrdiff_t>(n));
}

void NeighborsCache::erase_origin(std::uint32_t origin) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (origins_[i] == origin) continue;
    if (out != i) {
      std::copy_n(keys_.begin() + static_cast<std::ptrdiff_t>(i * dim_), dim_,
                  keys_.begin() + static_cast<std::ptrdiff_t>(out * dim_));
      values_[out] = values_[i];
      origins_[out] = origins_[i];
    }
    ++out;
  }
  keys_.resize(out * dim_);
  values_.resize(out);
  origins_.resize(out);
}

}  // namespace chunkstore
