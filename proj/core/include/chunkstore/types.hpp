#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace chunkstore {

using TokenId = std::uint32_t;
using EntryId = std::uint64_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;

/// Decoder output representation, full (d_full) or PCA-reduced.
using StateVector = std::vector<float>;

using TokenSeq = std::vector<TokenId>;

/// A source sentence and its EOS-terminated target.
struct SentencePair {
  TokenSeq source;
  TokenSeq target;
};

/// Throws InvalidArgument unless the pair is nonempty, PAD-free and the
/// target carries exactly one EOS, in final position.
void validate_pair(const SentencePair& pair);

/// Dense token inventory. Ids 0..3 are always <pad> <s> </s> <unk>.
class Vocab {
 public:
  Vocab();

  /// Returns the id of `token`, adding it if absent.
  TokenId add(std::string_view token);

  /// Id of `token`, or kUnk.
  TokenId lookup(std::string_view token) const;
  bool contains(std::string_view token) const;

  const std::string& token(TokenId id) const;
  std::size_t size() const noexcept { return tokens_.size(); }

  TokenSeq encode(std::string_view line) const;
  /// Joins tokens with single spaces; drops BOS/EOS/PAD.
  std::string decode(const TokenSeq& ids) const;

  static Vocab load(const std::string& path);
  void save(const std::string& path) const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// Splits on ASCII whitespace.
std::vector<std::string_view> split_tokens(std::string_view line);

/// Interpolation and temperature hyperparameters for datastore and cache
/// retrieval steps.
struct MixParams {
  double lambda_ds = 0.7;
  double temp_ds = 10.0;
  double lambda_cache = 0.5;
  double temp_cache = 1.0;
  int k = 8;

  void validate() const;
};

}  // namespace chunkstore
