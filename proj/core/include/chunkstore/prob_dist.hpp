#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "chunkstore/types.hpp"

namespace chunkstore {

/// Sparse probability distribution over token ids. Entries are kept sorted
/// by id; absent ids have probability zero.
class ProbDist {
 public:
  using Entry = std::pair<TokenId, double>;

  ProbDist() = default;

  /// Takes ownership of entries that are already sorted by id and unique.
  static ProbDist from_sorted(std::vector<Entry> entries);
  /// Dense vector indexed by token id; zero entries are dropped.
  static ProbDist from_dense(std::span<const double> probs);
  static ProbDist point_mass(TokenId token);

  double prob(TokenId token) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t support_size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  double total() const;
  /// Highest-probability token; ties go to the smallest id.
  TokenId argmax() const;
  /// The `n` most probable entries, probability descending, ties by id.
  std::vector<Entry> top(std::size_t n) const;

  /// True when entries are non-negative and sum to 1 within `tol`.
  bool is_valid(double tol = 1e-9) const;

  bool operator==(const ProbDist& other) const = default;

 private:
  explicit ProbDist(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  std::vector<Entry> entries_;
};

/// A retrieved value with its squared distance to the query.
struct ScoredToken {
  double distance = 0.0;
  TokenId token = kPad;
};

/// Softmax over negative distances scaled by `temp`, aggregated per token.
/// Throws EmptyNeighborSet / NonPositiveTemperature.
ProbDist retrieval_distribution(std::span<const ScoredToken> neighbors, double temp);

/// (1 - lambda) * p_model + lambda * p_retrieval over the union of supports.
/// Throws LambdaOutOfRange.
ProbDist interpolate(const ProbDist& p_model, const ProbDist& p_retrieval, double lambda);

}  // namespace chunkstore
