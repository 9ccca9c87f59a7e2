#include "chunkstore/datastore.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "chunkstore/error.hpp"
#include "chunkstore/parallel.hpp"

namespace chunkstore {

namespace {

constexpr char kDatastoreMagic[] = "CKDS";
constexpr std::uint32_t kDatastoreVersion = 1;

std::size_t resolve_threads(std::size_t threads) {
  return threads == 0 ? thread_count() : threads;
}

void check_pairs(const ModelInterface& model, std::span<const SentencePair> pairs) {
  for (const auto& pair : pairs) {
    validate_pair(pair);
    for (TokenId t : pair.target) {
      if (t >= model.vocab_size()) throw Error(Errc::kInvalidArgument, "target token out of vocab");
    }
  }
}

void write_pca(detail::BinaryWriter& w, const PcaTransform& pca) {
  w.put_span<float>(pca.mean());
  w.put_span<float>(pca.projection());
}

PcaTransform read_pca(detail::BinaryReader& r, std::uint32_t d_in, std::uint32_t d_out) {
  auto mean = r.get_vector<float>(d_in);
  auto proj = r.get_vector<float>(static_cast<std::uint64_t>(d_in) * d_out);
  return PcaTransform(std::move(mean), std::move(proj), d_out);
}

}  // namespace

std::vector<float> forced_states(const ModelInterface& model, const SentencePair& pair) {
  const std::size_t d = model.state_dim();
  const SourceContext ctx = model.encode(pair.source);
  TokenSeq prefix;
  prefix.reserve(pair.target.size() + 1);
  prefix.push_back(kBos);
  std::vector<float> out(pair.target.size() * d);
  for (std::size_t t = 0; t < pair.target.size(); ++t) {
    const StateVector state = model.decoder_state(ctx, prefix);
    std::copy(state.begin(), state.end(), out.begin() + static_cast<std::ptrdiff_t>(t * d));
    prefix.push_back(pair.target[t]);
  }
  return out;
}

std::span<const float> Datastore::key(EntryId entry) const {
  if (entry >= entry_count_) throw Error(Errc::kInvalidArgument, "entry id out of range");
  return {keys_.data() + entry * d_key_, d_key_};
}

ChunkView Datastore::chunk(EntryId entry) const {
  if (entry >= entry_count_) throw Error(Errc::kInvalidArgument, "entry id out of range");
  return {{values_.data() + entry * chunk_size_, chunk_size_},
          {state_refs_.data() + entry * chunk_size_, chunk_size_}};
}

std::span<const float> Datastore::state(std::uint64_t ref) const {
  if (ref == kPadStateRef) {
    throw Error(Errc::kSentinelDereference, "PAD state reference dereferenced");
  }
  if (ref >= state_count_) throw Error(Errc::kInvalidArgument, "state reference out of range");
  return {state_array_.data() + ref * d_cache_, d_cache_};
}

void Datastore::add_pairs(const ModelInterface& model, std::span<const SentencePair> pairs,
                          std::size_t threads) {
  std::vector<std::uint64_t> offsets(pairs.size() + 1, 0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    offsets[i + 1] = offsets[i] + pairs[i].target.size();
  }
  const std::uint64_t added = offsets.back();
  const std::uint64_t entry_base = entry_count_;
  const std::uint64_t state_base = state_count_;
  const std::size_t c = chunk_size_;

  keys_.resize((entry_base + added) * d_key_);
  values_.resize((entry_base + added) * c);
  state_refs_.resize((entry_base + added) * c);
  state_array_.resize((state_base + added) * d_cache_);

  parallel_for(pairs.size(), resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const SentencePair& pair = pairs[p];
      const std::vector<float> raw = forced_states(model, pair);
      const std::size_t n = pair.target.size();
      for (std::size_t t = 0; t < n; ++t) {
        const std::uint64_t entry = entry_base + offsets[p] + t;
        const std::uint64_t state = state_base + offsets[p] + t;
        std::span<const float> f(raw.data() + t * d_full_, d_full_);
        pca_key_.apply(f, {keys_.data() + entry * d_key_, d_key_});
        pca_cache_.apply(f, {state_array_.data() + state * d_cache_, d_cache_});
        for (std::size_t i = 0; i < c; ++i) {
          const bool inside = t + i < n;
          values_[entry * c + i] = inside ? pair.target[t + i] : kPad;
          state_refs_[entry * c + i] = inside ? state + i : kPadStateRef;
        }
      }
    }
  });
  epochs_.push_back(entry_base);
  entry_count_ += added;
  state_count_ += added;
}

Datastore build_datastore(const ModelInterface& model, std::span<const SentencePair> corpus,
                          const DatastoreOptions& options) {
  if (corpus.empty()) throw Error(Errc::kEmptyCorpus, "cannot build a datastore from no pairs");
  if (options.chunk_size == 0) throw Error(Errc::kChunkSizeZero, "chunk size must be >= 1");
  const std::size_t d_full = model.state_dim();
  if (options.d_key > d_full || options.d_cache > d_full) {
    throw Error(Errc::kReducedDimExceedsFull,
                "d_key/d_cache must not exceed d_full=" + std::to_string(d_full));
  }
  if (options.d_key == 0 || options.d_cache == 0) {
    throw Error(Errc::kInvalidArgument, "reduced dimensions must be positive");
  }
  check_pairs(model, corpus);
  const std::size_t threads = resolve_threads(options.threads);

  std::vector<std::uint64_t> offsets(corpus.size() + 1, 0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    offsets[i + 1] = offsets[i] + corpus[i].target.size();
  }
  const std::uint64_t total = offsets.back();

  // Evenly spaced positions over the whole corpus form the PCA sample.
  const std::uint64_t n_sample =
      std::min<std::uint64_t>(total, std::max<std::size_t>(options.pca_sample, 1));
  std::vector<std::uint64_t> sample_pos(n_sample);
  for (std::uint64_t j = 0; j < n_sample; ++j) sample_pos[j] = j * total / n_sample;

  std::vector<float> samples(n_sample * d_full);
  parallel_for(n_sample, threads, [&](std::size_t begin, std::size_t end) {
    std::size_t cached_pair = corpus.size();
    SourceContext ctx;
    for (std::size_t j = begin; j < end; ++j) {
      const std::uint64_t pos = sample_pos[j];
      const auto it = std::upper_bound(offsets.begin(), offsets.end(), pos);
      const std::size_t p = static_cast<std::size_t>(it - offsets.begin()) - 1;
      const std::size_t t = static_cast<std::size_t>(pos - offsets[p]);
      const SentencePair& pair = corpus[p];
      if (p != cached_pair) {
        ctx = model.encode(pair.source);
        cached_pair = p;
      }
      TokenSeq prefix;
      prefix.reserve(t + 1);
      prefix.push_back(kBos);
      prefix.insert(prefix.end(), pair.target.begin(),
                    pair.target.begin() + static_cast<std::ptrdiff_t>(t));
      const StateVector state = model.decoder_state(ctx, prefix);
      std::copy(state.begin(), state.end(),
                samples.begin() + static_cast<std::ptrdiff_t>(j * d_full));
    }
  });

  Datastore ds;
  ds.chunk_size_ = options.chunk_size;
  ds.d_full_ = static_cast<std::uint32_t>(d_full);
  ds.d_key_ = options.d_key;
  ds.d_cache_ = options.d_cache;
  ds.pca_key_ = fit_pca(samples, d_full, options.d_key).transform;
  ds.pca_cache_ = fit_pca(samples, d_full, options.d_cache).transform;
  ds.add_pairs(model, corpus, threads);
  return ds;
}

void append_examples(Datastore& ds, const ModelInterface& model,
                     std::span<const SentencePair> pairs, std::size_t threads) {
  if (pairs.empty()) throw Error(Errc::kEmptyAppend, "no pairs to append");
  if (model.state_dim() != ds.d_full()) {
    throw Error(Errc::kDimensionMismatch, "model state dimension differs from the datastore");
  }
  check_pairs(model, pairs);
  ds.add_pairs(model, pairs, threads);
}

void Datastore::write(std::ostream& out) const {
  detail::BinaryWriter w(out);
  w.magic({kDatastoreMagic, 4});
  w.put<std::uint32_t>(kDatastoreVersion);
  w.put<std::uint32_t>(d_full_);
  w.put<std::uint32_t>(d_key_);
  w.put<std::uint32_t>(d_cache_);
  w.put<std::uint32_t>(chunk_size_);
  w.put<std::uint64_t>(entry_count_);
  w.put<std::uint64_t>(state_count_);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(epochs_.size()));
  write_pca(w, pca_key_);
  write_pca(w, pca_cache_);
  w.put_span<float>(keys_);
  w.put_span<TokenId>(values_);
  w.put_span<std::uint64_t>(state_refs_);
  w.put_span<float>(state_array_);
  w.put_span<std::uint64_t>(epochs_);
  w.check("datastore");
}

Datastore Datastore::read(std::istream& in) {
  detail::BinaryReader r(in, "datastore");
  r.expect_magic({kDatastoreMagic, 4});
  if (const auto version = r.get<std::uint32_t>(); version != kDatastoreVersion) {
    throw Error(Errc::kVersionMismatch, "datastore version " + std::to_string(version));
  }
  Datastore ds;
  ds.d_full_ = r.get<std::uint32_t>();
  ds.d_key_ = r.get<std::uint32_t>();
  ds.d_cache_ = r.get<std::uint32_t>();
  ds.chunk_size_ = r.get<std::uint32_t>();
  ds.entry_count_ = r.get<std::uint64_t>();
  ds.state_count_ = r.get<std::uint64_t>();
  const auto epoch_count = r.get<std::uint32_t>();
  if (ds.d_key_ > ds.d_full_ || ds.d_cache_ > ds.d_full_) {
    throw Error(Errc::kReducedDimExceedsFull, "corrupt datastore header");
  }
  ds.pca_key_ = read_pca(r, ds.d_full_, ds.d_key_);
  ds.pca_cache_ = read_pca(r, ds.d_full_, ds.d_cache_);
  ds.keys_ = r.get_vector<float>(ds.entry_count_ * ds.d_key_);
  ds.values_ = r.get_vector<TokenId>(ds.entry_count_ * ds.chunk_size_);
  ds.state_refs_ = r.get_vector<std::uint64_t>(ds.entry_count_ * ds.chunk_size_);
  ds.state_array_ = r.get_vector<float>(ds.state_count_ * ds.d_cache_);
  ds.epochs_ = r.get_vector<std::uint64_t>(epoch_count);
  for (std::uint64_t ref : ds.state_refs_) {
    if (ref != kPadStateRef && ref >= ds.state_count_) {
      throw Error(Errc::kInvalidArgument, "state reference past the state array");
    }
  }
  return ds;
}

void Datastore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path);
  write(out);
}

Datastore Datastore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path);
  return read(in);
}

}  // namespace chunkstore
