#include "chunkstore/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "chunkstore/error.hpp"

namespace chunkstore {

namespace {

using NgramCounts = std::map<std::vector<TokenId>, std::uint32_t>;

NgramCounts count_ngrams(const TokenSeq& seq, std::size_t n) {
  NgramCounts counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[std::vector<TokenId>(seq.begin() + static_cast<std::ptrdiff_t>(i),
                                  seq.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

BleuReport corpus_bleu(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references) {
  if (hypotheses.size() != references.size()) {
    throw Error(Errc::kLengthMismatch, std::to_string(hypotheses.size()) + " hypotheses vs " +
                                           std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw Error(Errc::kEmptyCorpus, "BLEU of an empty corpus");

  BleuReport report;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const TokenSeq& hyp = hypotheses[s];
    const TokenSeq& ref = references[s];
    report.hyp_len += hyp.size();
    report.ref_len += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const NgramCounts h = count_ngrams(hyp, n);
      const NgramCounts r = count_ngrams(ref, n);
      for (const auto& [gram, count] : h) {
        report.totals[n - 1] += count;
        auto it = r.find(gram);
        if (it != r.end()) report.matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  double log_sum = 0.0;
  bool zero = report.hyp_len == 0;
  for (std::size_t n = 0; n < 4; ++n) {
    report.precisions[n] = report.totals[n] == 0
                               ? 0.0
                               : static_cast<double>(report.matches[n]) /
                                     static_cast<double>(report.totals[n]);
    if (report.precisions[n] == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(report.precisions[n]);
    }
  }
  if (report.hyp_len > 0) {
    const double ratio = static_cast<double>(report.ref_len) / static_cast<double>(report.hyp_len);
    report.brevity_penalty = ratio > 1.0 ? std::exp(1.0 - ratio) : 1.0;
  }
  report.score = zero ? 0.0 : 100.0 * report.brevity_penalty * std::exp(log_sum / 4.0);
  return report;
}

}  // namespace chunkstore
