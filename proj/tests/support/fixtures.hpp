#pragma once

#include <chunkstore/chunkstore.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace fixtures {

// A small in-domain setup: phrase-domain corpus, trained toy model and
// datastore. Shared by decode-level tests.
struct Setup {
  chunkstore::Vocab vocab;
  std::vector<chunkstore::SentencePair> train;
  std::vector<chunkstore::SentencePair> held_out;
  chunkstore::ToyModel model;
  chunkstore::Datastore ds;
};

inline Setup make_setup(std::size_t train_pairs = 300, std::size_t held_out = 20,
                        std::uint32_t chunk_size = 6) {
  chunkstore::PhraseDomainOptions opt;
  opt.name = "q";
  opt.source_words = 60;
  opt.target_words = 60;
  opt.phrases = 80;
  opt.seed = 5;
  chunkstore::PhraseDomain domain(opt);
  chunkstore::Vocab vocab;
  auto train = chunkstore::encode_text_pairs(vocab, domain.sample(train_pairs, 11));
  auto test = chunkstore::encode_text_pairs(vocab, domain.sample(held_out, 12));
  auto model = chunkstore::train_toy(train, vocab.size());
  chunkstore::DatastoreOptions dopt;
  dopt.chunk_size = chunk_size;
  dopt.threads = 1;
  auto ds = chunkstore::build_datastore(model, train, dopt);
  return Setup{std::move(vocab), std::move(train), std::move(test), std::move(model), std::move(ds)};
}

inline std::vector<chunkstore::TokenSeq> sources_of(
    const std::vector<chunkstore::SentencePair>& pairs) {
  std::vector<chunkstore::TokenSeq> out;
  for (const auto& p : pairs) out.push_back(p.source);
  return out;
}

// Unique scratch path under the system temp directory.
inline std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "chunkstore_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace fixtures
