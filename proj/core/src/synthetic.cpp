#include "chunkstore/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chunkstore/error.hpp"

namespace chunkstore {

namespace {

std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

PhraseDomain::PhraseDomain(const PhraseDomainOptions& options) : options_(options) {
  if (options_.phrases == 0 || options_.source_words == 0 || options_.target_words == 0 ||
      options_.min_phrase_len == 0 || options_.min_phrase_len > options_.max_phrase_len ||
      options_.min_phrases_per_sentence == 0 ||
      options_.min_phrases_per_sentence > options_.max_phrases_per_sentence) {
    throw Error(Errc::kInvalidArgument, "inconsistent phrase domain options");
  }
  std::mt19937_64 rng(options_.seed);
  phrases_.resize(options_.phrases);
  for (auto& phrase : phrases_) {
    const auto src_len = uniform_int(rng, options_.min_phrase_len, options_.max_phrase_len);
    const auto tgt_len = uniform_int(rng, options_.min_phrase_len, options_.max_phrase_len);
    for (std::uint64_t i = 0; i < src_len; ++i) {
      phrase.source.push_back(options_.name + "s" +
                              std::to_string(rng() % options_.source_words));
    }
    for (std::uint64_t i = 0; i < tgt_len; ++i) {
      phrase.target.push_back(options_.name + "t" +
                              std::to_string(rng() % options_.target_words));
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < phrases_.size(); ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i + 1), options_.zipf);
    cumulative_.push_back(acc);
  }
  for (auto& c : cumulative_) c /= acc;
}

std::vector<TextPair> PhraseDomain::sample(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<TextPair> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const auto n = uniform_int(rng, options_.min_phrases_per_sentence,
                               options_.max_phrases_per_sentence);
    TextPair pair;
    for (std::uint64_t p = 0; p < n; ++p) {
      const double u = uniform01(rng);
      const auto idx = std::min<std::size_t>(
          static_cast<std::size_t>(std::lower_bound(cumulative_.begin(), cumulative_.end(), u) -
                                   cumulative_.begin()),
          phrases_.size() - 1);
      for (const auto& w : phrases_[idx].source) {
        if (!pair.source.empty()) pair.source.push_back(' ');
        pair.source += w;
      }
      for (const auto& w : phrases_[idx].target) {
        if (!pair.target.empty()) pair.target.push_back(' ');
        pair.target += w;
      }
    }
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<SentencePair> encode_text_pairs(Vocab& vocab, const std::vector<TextPair>& pairs) {
  std::vector<SentencePair> out;
  out.reserve(pairs.size());
  for (const auto& tp : pairs) {
    SentencePair pair;
    for (auto tok : split_tokens(tp.source)) pair.source.push_back(vocab.add(tok));
    for (auto tok : split_tokens(tp.target)) pair.target.push_back(vocab.add(tok));
    pair.target.push_back(kEos);
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<SentencePair> random_pairs(std::size_t count, std::size_t vocab_size,
                                       std::size_t min_len, std::size_t max_len,
                                       std::uint64_t seed) {
  if (vocab_size <= 4 || min_len < 1 || min_len > max_len) {
    throw Error(Errc::kInvalidArgument, "bad random corpus parameters");
  }
  std::mt19937_64 rng(seed);
  std::vector<SentencePair> out(count);
  for (auto& pair : out) {
    const auto ls = uniform_int(rng, min_len, max_len);
    const auto lt = uniform_int(rng, min_len, max_len);
    for (std::uint64_t i = 0; i < ls; ++i) {
      pair.source.push_back(static_cast<TokenId>(4 + rng() % (vocab_size - 4)));
    }
    for (std::uint64_t i = 0; i + 1 < lt; ++i) {
      pair.target.push_back(static_cast<TokenId>(4 + rng() % (vocab_size - 4)));
    }
    pair.target.push_back(kEos);
  }
  return out;
}

}  // namespace chunkstore
