#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chunkstore/types.hpp"

namespace chunkstore {

/// Lines of a UTF-8 text file, trailing CR stripped.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

/// Builds a vocabulary from whitespace-tokenized lines, in first-seen order.
Vocab build_vocab(const std::vector<std::vector<std::string>>& corpora);

/// Pairs parallel source/target lines; EOS is appended to each target.
/// Throws LengthMismatch; blank lines are rejected.
std::vector<SentencePair> encode_parallel(const Vocab& vocab,
                                          const std::vector<std::string>& sources,
                                          const std::vector<std::string>& targets);

std::vector<TokenSeq> encode_lines(const Vocab& vocab, const std::vector<std::string>& lines);

/// Target sides without their EOS, as BLEU references.
std::vector<TokenSeq> references_of(const std::vector<SentencePair>& pairs);

}  // namespace chunkstore
