#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "chunkstore/types.hpp"

namespace chunkstore {

/// Corpus-level 4-gram BLEU with exponential brevity penalty, no smoothing.
struct BleuReport {
  double score = 0.0;  // 0..100
  std::array<double, 4> precisions{};
  std::array<std::uint64_t, 4> matches{};
  std::array<std::uint64_t, 4> totals{};
  double brevity_penalty = 0.0;
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;
};

/// Throws LengthMismatch and EmptyCorpus.
BleuReport corpus_bleu(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references);

}  // namespace chunkstore
