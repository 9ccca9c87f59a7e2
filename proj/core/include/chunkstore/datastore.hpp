#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "chunkstore/model.hpp"
#include "chunkstore/pca.hpp"
#include "chunkstore/types.hpp"

namespace chunkstore {

/// state_refs value for PAD chunk positions.
inline constexpr std::uint64_t kPadStateRef = std::numeric_limits<std::uint64_t>::max();

/// A datastore value: c target tokens plus, for each, a reference into the
/// datastore's state array.
struct ChunkView {
  std::span<const TokenId> tokens;
  std::span<const std::uint64_t> state_refs;

  std::size_t size() const noexcept { return tokens.size(); }
};

struct DatastoreOptions {
  std::uint32_t chunk_size = 16;
  std::uint32_t d_key = 32;
  std::uint32_t d_cache = 16;
  /// Upper bound on raw states used to fit the two PCAs.
  std::size_t pca_sample = 100000;
  /// 0 means thread_count().
  std::size_t threads = 0;
};

/// Chunk-valued key-value memory: one entry per target position of every
/// indexed sentence pair. Keys are PCA-reduced decoder states; values are
/// sliding windows of c target tokens with references into an array of
/// cache-reduced decoder states.
class Datastore {
 public:
  Datastore() = default;

  std::uint32_t chunk_size() const noexcept { return chunk_size_; }
  std::uint32_t d_full() const noexcept { return d_full_; }
  std::uint32_t d_key() const noexcept { return d_key_; }
  std::uint32_t d_cache() const noexcept { return d_cache_; }
  std::uint64_t entry_count() const noexcept { return entry_count_; }
  std::uint64_t state_count() const noexcept { return state_count_; }

  std::span<const float> key(EntryId entry) const;
  const std::vector<float>& keys() const noexcept { return keys_; }
  ChunkView chunk(EntryId entry) const;
  /// Throws SentinelDereference for kPadStateRef, InvalidArgument past the end.
  std::span<const float> state(std::uint64_t ref) const;

  const PcaTransform& pca_key() const noexcept { return pca_key_; }
  const PcaTransform& pca_cache() const noexcept { return pca_cache_; }

  /// First entry id of each appended segment; epochs()[0] == 0.
  const std::vector<std::uint64_t>& epochs() const noexcept { return epochs_; }

  void write(std::ostream& out) const;
  static Datastore read(std::istream& in);
  void save(const std::string& path) const;
  /// Reads the datastore section of `path`; a trailing index section is ignored.
  static Datastore load(const std::string& path);

  bool operator==(const Datastore&) const = default;

 private:
  friend Datastore build_datastore(const ModelInterface&, std::span<const SentencePair>,
                                   const DatastoreOptions&);
  friend void append_examples(Datastore&, const ModelInterface&, std::span<const SentencePair>,
                              std::size_t);

  void add_pairs(const ModelInterface& model, std::span<const SentencePair> pairs,
                 std::size_t threads);

  std::uint32_t chunk_size_ = 0;
  std::uint32_t d_full_ = 0;
  std::uint32_t d_key_ = 0;
  std::uint32_t d_cache_ = 0;
  std::uint64_t entry_count_ = 0;
  std::uint64_t state_count_ = 0;
  PcaTransform pca_key_;
  PcaTransform pca_cache_;
  std::vector<float> keys_;               // entry_count x d_key
  std::vector<TokenId> values_;           // entry_count x c
  std::vector<std::uint64_t> state_refs_; // entry_count x c
  std::vector<float> state_array_;        // state_count x d_cache
  std::vector<std::uint64_t> epochs_;
};

/// Forced-decodes every pair, fits the key and cache PCAs on a uniform
/// sample of raw states, and stores one entry per target position.
/// Throws EmptyCorpus, ChunkSizeZero, ReducedDimExceedsFull.
Datastore build_datastore(const ModelInterface& model, std::span<const SentencePair> corpus,
                          const DatastoreOptions& options = {});

/// Appends `pairs` as a new epoch, reducing with the already fitted PCAs.
/// Throws EmptyAppend.
void append_examples(Datastore& ds, const ModelInterface& model,
                     std::span<const SentencePair> pairs, std::size_t threads = 0);

/// Raw decoder states f(x, y_<t) for t = 1..N of one pair, row-major.
std::vector<float> forced_states(const ModelInterface& model, const SentencePair& pair);

}  // namespace chunkstore
