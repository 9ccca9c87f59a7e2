#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chunkstore/types.hpp"

namespace chunkstore {

/// A toy "language pair": a fixed inventory of phrase translations over
/// domain-prefixed word pools. Sentences are random phrase sequences; the
/// target is the concatenation of the phrase translations.
struct PhraseDomainOptions {
  std::string name = "d0";
  std::uint32_t source_words = 400;
  std::uint32_t target_words = 400;
  std::uint32_t phrases = 300;
  std::uint32_t min_phrase_len = 2;
  std::uint32_t max_phrase_len = 4;
  std::uint32_t min_phrases_per_sentence = 3;
  std::uint32_t max_phrases_per_sentence = 6;
  /// Zipf exponent of phrase frequencies (0 = uniform).
  double zipf = 1.0;
  std::uint64_t seed = 7;
};

struct TextPair {
  std::string source;
  std::string target;  // without </s>
};

class PhraseDomain {
 public:
  explicit PhraseDomain(const PhraseDomainOptions& options);

  const PhraseDomainOptions& options() const noexcept { return options_; }
  std::size_t phrase_count() const noexcept { return phrases_.size(); }

  /// `count` sentences drawn with generator seed `seed`.
  std::vector<TextPair> sample(std::size_t count, std::uint64_t seed) const;

 private:
  struct Phrase {
    std::vector<std::string> source;
    std::vector<std::string> target;
  };

  PhraseDomainOptions options_;
  std::vector<Phrase> phrases_;
  std::vector<double> cumulative_;  // phrase sampling CDF
};

/// Adds every token of the text pairs to `vocab`, then encodes them.
std::vector<SentencePair> encode_text_pairs(Vocab& vocab, const std::vector<TextPair>& pairs);

/// Random pairs over ids [4, vocab_size), lengths uniform in the given
/// ranges (target length counts the final EOS).
std::vector<SentencePair> random_pairs(std::size_t count, std::size_t vocab_size,
                                       std::size_t min_len, std::size_t max_len,
                                       std::uint64_t seed);

}  // namespace chunkstore
