#include "chunkstore/corpus.hpp"

#include <fstream>

#include "chunkstore/error.hpp"

namespace chunkstore {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path);
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw Error(Errc::kIoError, "write failed for " + path);
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& corpora) {
  Vocab vocab;
  for (const auto& lines : corpora) {
    for (const auto& line : lines) {
      for (auto tok : split_tokens(line)) vocab.add(tok);
    }
  }
  return vocab;
}

std::vector<SentencePair> encode_parallel(const Vocab& vocab,
                                          const std::vector<std::string>& sources,
                                          const std::vector<std::string>& targets) {
  if (sources.size() != targets.size()) {
    throw Error(Errc::kLengthMismatch, std::to_string(sources.size()) + " source lines vs " +
                                           std::to_string(targets.size()) + " target lines");
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    SentencePair pair{vocab.encode(sources[i]), vocab.encode(targets[i])};
    if (pair.source.empty() || pair.target.empty()) {
      throw Error(Errc::kInvalidArgument, "blank line " + std::to_string(i + 1));
    }
    pair.target.push_back(kEos);
    validate_pair(pair);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<TokenSeq> encode_lines(const Vocab& vocab, const std::vector<std::string>& lines) {
  std::vector<TokenSeq> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(vocab.encode(line));
  return out;
}

std::vector<TokenSeq> references_of(const std::vector<SentencePair>& pairs) {
  std::vector<TokenSeq> refs;
  refs.reserve(pairs.size());
  for (const auto& p : pairs) {
    TokenSeq r = p.target;
    if (!r.empty() && r.back() == kEos) r.pop_back();
    refs.push_back(std::move(r));
  }
  return refs;
}

}  // namespace chunkstore
