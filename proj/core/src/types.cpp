#include "chunkstore/types.hpp"

#include <fstream>

#include "chunkstore/error.hpp"

namespace chunkstore {

namespace {

constexpr const char* kReserved[] = {"<pad>", "<s>", "</s>", "<unk>"};

bool is_space(char ch) {
  return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' || ch == '\f';
}

}  // namespace

void validate_pair(const SentencePair& pair) {
  if (pair.source.empty() || pair.target.empty()) {
    throw Error(Errc::kInvalidArgument, "sentence pair with empty side");
  }
  for (TokenId t : pair.source) {
    if (t == kPad) throw Error(Errc::kInvalidArgument, "PAD inside source");
  }
  for (std::size_t i = 0; i < pair.target.size(); ++i) {
    const TokenId t = pair.target[i];
    if (t == kPad) throw Error(Errc::kInvalidArgument, "PAD inside target");
    const bool last = i + 1 == pair.target.size();
    if ((t == kEos) != last) {
      throw Error(Errc::kInvalidArgument, "target must end with exactly one EOS");
    }
  }
}

Vocab::Vocab() {
  for (const char* tok : kReserved) add(tok);
}

TokenId Vocab::add(std::string_view token) {
  const std::string key(token);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(key);
  ids_.emplace(key, id);
  return id;
}

TokenId Vocab::lookup(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return ids_.find(std::string(token)) != ids_.end();
}

const std::string& Vocab::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw Error(Errc::kInvalidArgument, "token id " + std::to_string(id) + " out of range");
  }
  return tokens_[id];
}

TokenSeq Vocab::encode(std::string_view line) const {
  TokenSeq out;
  for (auto tok : split_tokens(line)) out.push_back(lookup(tok));
  return out;
}

std::string Vocab::decode(const TokenSeq& ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    if (!out.empty()) out.push_back(' ');
    out += token(id);
  }
  return out;
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot open vocab file " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() < 4) throw Error(Errc::kInvalidVocab, "vocab has fewer than 4 lines: " + path);
  for (std::size_t i = 0; i < 4; ++i) {
    if (lines[i] != kReserved[i]) {
      throw Error(Errc::kInvalidVocab,
                  "line " + std::to_string(i) + " must be " + kReserved[i] + " in " + path);
    }
  }
  Vocab vocab;
  for (std::size_t i = 4; i < lines.size(); ++i) {
    if (lines[i].empty() || vocab.contains(lines[i])) {
      throw Error(Errc::kInvalidVocab,
                  "empty or duplicate token at line " + std::to_string(i) + " in " + path);
    }
    vocab.add(lines[i]);
  }
  return vocab;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write vocab file " + path);
  for (const auto& tok : tokens_) out << tok << '\n';
  if (!out) throw Error(Errc::kIoError, "write failed for " + path);
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

void MixParams::validate() const {
  if (lambda_ds < 0.0 || lambda_ds > 1.0 || lambda_cache < 0.0 || lambda_cache > 1.0) {
    throw Error(Errc::kLambdaOutOfRange, "interpolation coefficients must lie in [0, 1]");
  }
  if (!(temp_ds > 0.0) || !(temp_cache > 0.0)) {
    throw Error(Errc::kNonPositiveTemperature, "temperatures must be positive");
  }
  if (k < 1) throw Error(Errc::kInvalidArgument, "k must be >= 1");
}

}  // namespace chunkstore
