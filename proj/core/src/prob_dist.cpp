#include "chunkstore/prob_dist.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chunkstore/error.hpp"

namespace chunkstore {

ProbDist ProbDist::from_sorted(std::vector<Entry> entries) {
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i - 1].first >= entries[i].first) {
      throw Error(Errc::kInvalidArgument, "ProbDist entries must be sorted and unique");
    }
  }
  return ProbDist(std::move(entries));
}

ProbDist ProbDist::from_dense(std::span<const double> probs) {
  std::vector<Entry> entries;
  entries.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] != 0.0) entries.emplace_back(static_cast<TokenId>(i), probs[i]);
  }
  return ProbDist(std::move(entries));
}

ProbDist ProbDist::point_mass(TokenId token) { return ProbDist({{token, 1.0}}); }

double ProbDist::prob(TokenId token) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), token,
                             [](const Entry& e, TokenId t) { return e.first < t; });
  return it != entries_.end() && it->first == token ? it->second : 0.0;
}

double ProbDist::total() const {
  double sum = 0.0;
  for (const auto& [tok, p] : entries_) sum += p;
  return sum;
}

TokenId ProbDist::argmax() const {
  if (entries_.empty()) throw Error(Errc::kInvalidArgument, "argmax of empty distribution");
  const Entry* best = &entries_.front();
  for (const auto& e : entries_) {
    if (e.second > best->second) best = &e;
  }
  return best->first;
}

std::vector<ProbDist::Entry> ProbDist::top(std::size_t n) const {
  std::vector<Entry> out(entries_);
  n = std::min(n, out.size());
  auto better = [](const Entry& a, const Entry& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), better);
  out.resize(n);
  return out;
}

bool ProbDist::is_valid(double tol) const {
  for (const auto& [tok, p] : entries_) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
  }
  return std::abs(total() - 1.0) <= tol;
}

ProbDist retrieval_distribution(std::span<const ScoredToken> neighbors, double temp) {
  if (neighbors.empty()) throw Error(Errc::kEmptyNeighborSet, "no neighbors to score");
  if (!(temp > 0.0)) {
    throw Error(Errc::kNonPositiveTemperature, "temperature " + std::to_string(temp));
  }
  // Canonical order makes the result independent of the input permutation.
  std::vector<ScoredToken> sorted(neighbors.begin(), neighbors.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScoredToken& a, const ScoredToken& b) {
    return a.token != b.token ? a.token < b.token : a.distance < b.distance;
  });
  double min_dist = sorted.front().distance;
  for (const auto& n : sorted) min_dist = std::min(min_dist, n.distance);

  std::vector<ProbDist::Entry> entries;
  double norm = 0.0;
  for (const auto& n : sorted) {
    const double w = std::exp(-(n.distance - min_dist) / temp);
    if (!entries.empty() && entries.back().first == n.token) {
      entries.back().second += w;
    } else {
      entries.emplace_back(n.token, w);
    }
    norm += w;
  }
  for (auto& e : entries) e.second /= norm;
  return ProbDist::from_sorted(std::move(entries));
}

ProbDist interpolate(const ProbDist& p_model, const ProbDist& p_retrieval, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(Errc::kLambdaOutOfRange, "lambda " + std::to_string(lambda));
  }
  if (lambda == 0.0) return p_model;
  if (lambda == 1.0) return p_retrieval;
  const auto& a = p_model.entries();
  const auto& b = p_retrieval.entries();
  const double wa = 1.0 - lambda;
  std::vector<ProbDist::Entry> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.emplace_back(a[i].first, wa * a[i].second);
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, lambda * b[j].second);
      ++j;
    } else {
      out.emplace_back(a[i].first, wa * a[i].second + lambda * b[j].second);
      ++i;
      ++j;
    }
  }
  return ProbDist::from_sorted(std::move(out));
}

}  // namespace chunkstore
