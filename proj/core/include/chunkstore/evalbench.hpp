#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chunkstore/bleu.hpp"
#include "chunkstore/datastore.hpp"
#include "chunkstore/decode.hpp"
#include "chunkstore/index.hpp"

namespace chunkstore {

/// On-the-fly adaptation stream: a warm prefix is indexed up front, the rest
/// is translated in order and its (source, reference) pairs are appended to
/// the datastore after every `update_block` sentences.
struct StreamConfig {
  double warm_fraction = 0.10;
  std::size_t update_block = 250;
  std::size_t report_block = 4000;

  void validate() const;
  /// Number of leading stream pairs that form the warm datastore.
  std::size_t warm_count(std::size_t stream_size) const;
};

struct StreamBlock {
  std::size_t begin = 0;  // stream positions [begin, end)
  std::size_t end = 0;
  BleuReport bleu;
};

struct StreamUpdate {
  std::size_t after = 0;  // stream position after which the update ran
  std::uint64_t appended_pairs = 0;
  std::uint64_t appended_tokens = 0;
  double ms = 0.0;
};

struct StreamReport {
  std::size_t warm_count = 0;
  std::vector<StreamBlock> blocks;
  std::vector<StreamUpdate> updates;
  std::vector<Translation> translations;  // one per translated stream pair
  double update_ms = 0.0;
  double inference_ms = 0.0;
  double total_ms = 0.0;
};

/// `ds` must already hold the warm prefix and `index` must search `ds`.
StreamReport run_stream(const ModelInterface& model, Datastore& ds, Index& index,
                        const DecodeConfig& config, const StreamConfig& stream_config,
                        std::span<const SentencePair> stream);

struct BenchRow {
  std::string label;
  DecodeConfig config;
  DecodeStats totals;
  std::size_t sentences = 0;

  double tokens_per_sec() const { return totals.tokens_per_sec(); }
  /// Datastore searches issued (across the beam) per emitted token.
  double searches_per_token() const;
};

/// Runs each config over the same sources, one after another.
std::vector<BenchRow> bench(const ModelInterface& model, const Index* index,
                            std::span<const DecodeConfig> configs,
                            std::span<const std::string> labels,
                            std::span<const TokenSeq> sources);

/// CPU model and core count, for logging alongside wall-clock numbers.
std::string machine_descriptor();

}  // namespace chunkstore
