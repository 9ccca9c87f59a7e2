#include "chunkstore/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "chunkstore/error.hpp"

namespace chunkstore {

namespace {

constexpr char kModelMagic[] = "CKNM";
constexpr std::uint32_t kModelVersion = 1;

// Pre-activation gain of each input segment of the state projection.
constexpr float kSourceGain = 1.5f;
constexpr float kTokenGain = 1.6f;
constexpr float kPositionGain = 0.8f;
// Output scale applied after tanh. Keeps typical squared distances between
// unrelated states well above the default retrieval temperature of 10.
constexpr float kStateScale = 8.0f;

// Uniform in [-1, 1) from the raw 64-bit generator output. std::mt19937_64
// is fully specified, so this is reproducible on every platform.
float uniform_pm1(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return static_cast<float>(2.0 * u - 1.0);
}

void position_encoding(std::size_t position, std::span<float> out) {
  const std::size_t d = out.size();
  for (std::size_t i = 0; i < d; ++i) {
    const double rate = std::pow(10000.0, -static_cast<double>(i / 2 * 2) / static_cast<double>(d));
    const double angle = static_cast<double>(position) * rate;
    out[i] = static_cast<float>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
  }
}

ToyModel::Counts freeze(const std::map<TokenId, std::uint32_t>& counts) {
  ToyModel::Counts out;
  out.entries.assign(counts.begin(), counts.end());
  for (const auto& [tok, n] : counts) out.total += n;
  return out;
}

void write_counts(detail::BinaryWriter& w, const ToyModel::Counts& counts) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(counts.entries.size()));
  for (const auto& [tok, n] : counts.entries) {
    w.put<std::uint32_t>(tok);
    w.put<std::uint32_t>(n);
  }
}

ToyModel::Counts read_counts(detail::BinaryReader& r, std::size_t vocab_size) {
  ToyModel::Counts counts;
  const auto n = r.get<std::uint32_t>();
  counts.entries.reserve(std::min<std::size_t>(n, vocab_size));
  TokenId last = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto tok = r.get<std::uint32_t>();
    const auto c = r.get<std::uint32_t>();
    if (tok >= vocab_size || (i > 0 && tok <= last)) {
      throw Error(Errc::kInvalidArgument, "model count table is not sorted or out of range");
    }
    last = tok;
    counts.entries.emplace_back(tok, c);
    counts.total += c;
  }
  return counts;
}

}  // namespace

std::uint32_t ToyModel::Counts::count(TokenId token) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), token,
                             [](const auto& e, TokenId t) { return e.first < t; });
  return it != entries.end() && it->first == token ? it->second : 0;
}

ToyModel::ToyModel(std::size_t vocab_size, const ToyModelOptions& options)
    : vocab_size_(vocab_size), options_(options), cooc_(vocab_size) {
  if (options_.d_full == 0) throw Error(Errc::kInvalidArgument, "d_full must be positive");
  if (!(options_.alpha > 0.0)) throw Error(Errc::kInvalidArgument, "alpha must be positive");
  if (vocab_size_ < 4) throw Error(Errc::kInvalidArgument, "vocab must hold the reserved ids");
  init_parameters();
}

void ToyModel::init_parameters() {
  const std::size_t d = options_.d_full;
  std::mt19937_64 rng(options_.seed);
  // Unit-variance embeddings: uniform on [-sqrt(3), sqrt(3)].
  const float emb_scale = std::sqrt(3.0f);
  embeddings_.resize(vocab_size_ * d);
  for (auto& v : embeddings_) v = emb_scale * uniform_pm1(rng);

  const float w_scale = std::sqrt(3.0f / static_cast<float>(4 * d));
  const float gains[4] = {kSourceGain, kTokenGain, kTokenGain, kPositionGain};
  projection_.resize(d * 4 * d);
  for (std::size_t row = 0; row < d; ++row) {
    for (std::size_t col = 0; col < 4 * d; ++col) {
      projection_[row * 4 * d + col] = gains[col / d] * w_scale * uniform_pm1(rng);
    }
  }
}

ToyModel ToyModel::train(std::span<const SentencePair> corpus, std::size_t vocab_size,
                         const ToyModelOptions& options) {
  if (corpus.empty()) throw Error(Errc::kEmptyCorpus, "cannot train on an empty corpus");
  ToyModel model(vocab_size, options);

  std::unordered_map<std::uint64_t, std::map<TokenId, std::uint32_t>> trigram;
  std::vector<std::map<TokenId, std::uint32_t>> cooc(vocab_size);
  for (const auto& pair : corpus) {
    validate_pair(pair);
    for (TokenId t : pair.source) {
      if (t >= vocab_size) throw Error(Errc::kInvalidArgument, "source token out of vocab");
    }
    TokenId prev2 = kBos;
    TokenId prev1 = kBos;
    for (TokenId y : pair.target) {
      if (y >= vocab_size) throw Error(Errc::kInvalidArgument, "target token out of vocab");
      ++trigram[history_key(prev2, prev1)][y];
      prev2 = prev1;
      prev1 = y;
    }
    // EOS is left to the target history; it co-occurs with every source word.
    for (TokenId s : pair.source) {
      for (TokenId y : pair.target) {
        if (y != kEos) ++cooc[s][y];
      }
    }
  }
  model.trigrams_.reserve(trigram.size());
  for (const auto& [key, counts] : trigram) model.trigrams_.emplace(key, freeze(counts));
  for (std::size_t s = 0; s < vocab_size; ++s) model.cooc_[s] = freeze(cooc[s]);
  return model;
}

ToyModel train_toy(std::span<const SentencePair> corpus, std::size_t vocab_size,
                   const ToyModelOptions& options) {
  return ToyModel::train(corpus, vocab_size, options);
}

const ToyModel::Counts* ToyModel::trigram(TokenId prev2, TokenId prev1) const {
  auto it = trigrams_.find(history_key(prev2, prev1));
  return it == trigrams_.end() ? nullptr : &it->second;
}

const ToyModel::Counts& ToyModel::cooccurrence(TokenId source_token) const {
  return cooc_.at(source_token);
}

std::span<const float> ToyModel::embedding(TokenId token) const {
  if (token >= vocab_size_) throw Error(Errc::kInvalidArgument, "token out of vocab");
  const std::size_t d = options_.d_full;
  return {embeddings_.data() + static_cast<std::size_t>(token) * d, d};
}

SourceContext ToyModel::encode(std::span<const TokenId> source) const {
  if (source.empty()) throw Error(Errc::kInvalidArgument, "empty source sentence");
  const std::size_t d = options_.d_full;
  const double v = static_cast<double>(vocab_size_);
  const double alpha = options_.alpha;

  SourceContext ctx;
  ctx.tokens.assign(source.begin(), source.end());
  std::sort(ctx.tokens.begin(), ctx.tokens.end());

  std::vector<double> mean(d, 0.0);
  ctx.source_prior.assign(vocab_size_, 0.0);
  const double inv_len = 1.0 / static_cast<double>(source.size());
  for (TokenId s : source) {
    auto emb = embedding(s);
    for (std::size_t i = 0; i < d; ++i) mean[i] += emb[i];
    const Counts& counts = cooc_[s];
    const double denom = static_cast<double>(counts.total) + alpha * v;
    const double base = alpha / denom;
    for (auto& p : ctx.source_prior) p += inv_len * base;
    for (const auto& [tok, n] : counts.entries) {
      ctx.source_prior[tok] += inv_len * static_cast<double>(n) / denom;
    }
  }
  // Mean embedding, rescaled by sqrt(|x|) so its spread does not shrink with
  // sentence length.
  const double scale = inv_len * std::sqrt(static_cast<double>(source.size()));
  ctx.mean_embedding.resize(d);
  for (std::size_t i = 0; i < d; ++i) ctx.mean_embedding[i] = static_cast<float>(mean[i] * scale);
  return ctx;
}

StateVector ToyModel::decoder_state(const SourceContext& ctx,
                                    std::span<const TokenId> prefix) const {
  if (prefix.empty() || prefix.front() != kBos) {
    throw Error(Errc::kPrefixMissingBOS, "decoder prefix must start with <s>");
  }
  const std::size_t d = options_.d_full;
  if (ctx.mean_embedding.size() != d) {
    throw Error(Errc::kDimensionMismatch, "source context from a different model");
  }
  const TokenId prev1 = prefix.back();
  const TokenId prev2 = prefix.size() >= 2 ? prefix[prefix.size() - 2] : kBos;

  std::vector<float> input(4 * d);
  std::copy(ctx.mean_embedding.begin(), ctx.mean_embedding.end(), input.begin());
  auto e1 = embedding(prev1);
  auto e2 = embedding(prev2);
  std::copy(e1.begin(), e1.end(), input.begin() + static_cast<std::ptrdiff_t>(d));
  std::copy(e2.begin(), e2.end(), input.begin() + static_cast<std::ptrdiff_t>(2 * d));
  position_encoding(prefix.size(), std::span<float>(input).subspan(3 * d, d));

  StateVector state(d);
  for (std::size_t row = 0; row < d; ++row) {
    const float* w = projection_.data() + row * 4 * d;
    float acc = 0.0f;
    for (std::size_t col = 0; col < 4 * d; ++col) acc += w[col] * input[col];
    state[row] = kStateScale * std::tanh(acc);
  }
  return state;
}

DecoderOutput ToyModel::decoder_step(const SourceContext& ctx,
                                     std::span<const TokenId> prefix) const {
  DecoderOutput out;
  out.state = decoder_state(ctx, prefix);
  if (ctx.source_prior.size() != vocab_size_) {
    throw Error(Errc::kDimensionMismatch, "source context from a different model");
  }

  const TokenId prev1 = prefix.back();
  const TokenId prev2 = prefix.size() >= 2 ? prefix[prefix.size() - 2] : kBos;
  const Counts* counts = trigram(prev2, prev1);
  const double v = static_cast<double>(vocab_size_);
  const double alpha = options_.alpha;
  const double total = counts ? static_cast<double>(counts->total) : 0.0;
  const double denom = total + alpha * v;

  std::vector<double> probs(vocab_size_);
  for (std::size_t t = 0; t < vocab_size_; ++t) {
    probs[t] = 0.5 * (alpha / denom) + 0.5 * ctx.source_prior[t];
  }
  if (counts) {
    for (const auto& [tok, n] : counts->entries) probs[tok] += 0.5 * static_cast<double>(n) / denom;
  }
  out.p_model = ProbDist::from_dense(probs);
  return out;
}

std::string ToyModel::serialize() const {
  std::ostringstream out(std::ios::binary);
  detail::BinaryWriter w(out);
  w.magic({kModelMagic, 4});
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint64_t>(options_.seed);
  w.put<std::uint32_t>(options_.d_full);
  w.put<double>(options_.alpha);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(vocab_size_));

  std::vector<std::uint64_t> keys;
  keys.reserve(trigrams_.size());
  for (const auto& [key, counts] : trigrams_) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  w.put<std::uint64_t>(keys.size());
  for (std::uint64_t key : keys) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(key >> 32));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(key & 0xffffffffu));
    write_counts(w, trigrams_.at(key));
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cooc_.size()));
  for (const auto& counts : cooc_) write_counts(w, counts);
  w.check("model");
  return std::move(out).str();
}

ToyModel ToyModel::deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  detail::BinaryReader r(in, "model");
  r.expect_magic({kModelMagic, 4});
  if (const auto version = r.get<std::uint32_t>(); version != kModelVersion) {
    throw Error(Errc::kVersionMismatch, "model version " + std::to_string(version));
  }
  ToyModelOptions options;
  options.seed = r.get<std::uint64_t>();
  options.d_full = r.get<std::uint32_t>();
  options.alpha = r.get<double>();
  const auto vocab_size = r.get<std::uint32_t>();
  ToyModel model(vocab_size, options);

  const auto n_hist = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_hist; ++i) {
    const auto prev2 = r.get<std::uint32_t>();
    const auto prev1 = r.get<std::uint32_t>();
    model.trigrams_.emplace(history_key(prev2, prev1), read_counts(r, vocab_size));
  }
  const auto n_src = r.get<std::uint32_t>();
  if (n_src != vocab_size) throw Error(Errc::kInvalidArgument, "co-occurrence table size");
  for (std::uint32_t s = 0; s < n_src; ++s) model.cooc_[s] = read_counts(r, vocab_size);
  return model;
}

void ToyModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path);
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIoError, "write failed for " + path);
}

ToyModel ToyModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

bool ToyModel::operator==(const ToyModel& other) const {
  return vocab_size_ == other.vocab_size_ && options_.seed == other.options_.seed &&
         options_.d_full == other.options_.d_full && options_.alpha == other.options_.alpha &&
         trigrams_ == other.trigrams_ && cooc_ == other.cooc_;
}

}  // namespace chunkstore
