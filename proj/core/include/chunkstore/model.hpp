#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chunkstore/prob_dist.hpp"
#include "chunkstore/types.hpp"

namespace chunkstore {

/// Encoder output consumed by every decoder step of one sentence.
struct SourceContext {
  StateVector mean_embedding;
  TokenSeq tokens;  // sorted multiset of source ids
  /// Model-private precomputation (the toy model keeps its dense source
  /// co-occurrence distribution here).
  std::vector<double> source_prior;
};

struct DecoderOutput {
  StateVector state;
  ProbDist p_model;
};

/// Parametric model interface: decoder states f(x, y_<t) and p_NMT.
/// Implementations must be deterministic and safe for concurrent calls.
class ModelInterface {
 public:
  virtual ~ModelInterface() = default;

  virtual std::size_t state_dim() const noexcept = 0;
  virtual std::size_t vocab_size() const noexcept = 0;

  virtual SourceContext encode(std::span<const TokenId> source) const = 0;

  /// `prefix` starts with BOS. Throws PrefixMissingBOS otherwise.
  virtual DecoderOutput decoder_step(const SourceContext& ctx,
                                     std::span<const TokenId> prefix) const = 0;

  /// State only; the default forwards to decoder_step.
  virtual StateVector decoder_state(const SourceContext& ctx,
                                    std::span<const TokenId> prefix) const {
    return decoder_step(ctx, prefix).state;
  }
};

struct ToyModelOptions {
  std::uint64_t seed = 1;
  double alpha = 0.1;
  std::uint32_t d_full = 64;
};

/// Count-based stand-in for a neural translation model: smoothed target
/// trigram plus source co-occurrence, with a fixed random tanh projection
/// producing the decoder state.
class ToyModel final : public ModelInterface {
 public:
  /// Sparse next-token counts, sorted by token id.
  struct Counts {
    std::vector<std::pair<TokenId, std::uint32_t>> entries;
    std::uint64_t total = 0;

    std::uint32_t count(TokenId token) const;
    bool operator==(const Counts&) const = default;
  };

  static ToyModel train(std::span<const SentencePair> corpus, std::size_t vocab_size,
                        const ToyModelOptions& options = {});

  std::size_t state_dim() const noexcept override { return options_.d_full; }
  std::size_t vocab_size() const noexcept override { return vocab_size_; }
  const ToyModelOptions& options() const noexcept { return options_; }

  SourceContext encode(std::span<const TokenId> source) const override;
  DecoderOutput decoder_step(const SourceContext& ctx,
                             std::span<const TokenId> prefix) const override;
  StateVector decoder_state(const SourceContext& ctx,
                            std::span<const TokenId> prefix) const override;

  /// Counts for history (y_{t-2}, y_{t-1}); nullptr when unseen.
  const Counts* trigram(TokenId prev2, TokenId prev1) const;
  const Counts& cooccurrence(TokenId source_token) const;
  std::span<const float> embedding(TokenId token) const;

  void save(const std::string& path) const;
  static ToyModel load(const std::string& path);
  std::string serialize() const;
  static ToyModel deserialize(const std::string& bytes);

  bool operator==(const ToyModel& other) const;

 private:
  ToyModel(std::size_t vocab_size, const ToyModelOptions& options);
  void init_parameters();

  static std::uint64_t history_key(TokenId prev2, TokenId prev1) {
    return (static_cast<std::uint64_t>(prev2) << 32) | prev1;
  }

  std::size_t vocab_size_ = 0;
  ToyModelOptions options_;
  std::vector<float> embeddings_;  // vocab_size x d_full
  std::vector<float> projection_;  // d_full x 4*d_full
  std::unordered_map<std::uint64_t, Counts> trigrams_;
  std::vector<Counts> cooc_;       // indexed by source token
};

/// Throws EmptyCorpus.
ToyModel train_toy(std::span<const SentencePair> corpus, std::size_t vocab_size,
                   const ToyModelOptions& options = {});

}  // namespace chunkstore
