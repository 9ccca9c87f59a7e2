#include <chunkstore/chunkstore.hpp>
#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace chunkstore;

namespace {

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no chunkstore::Error thrown";
  return Errc::kInvalidArgument;
}

struct Store {
  ToyModel model;
  Datastore ds;
};

Store make_store() {
  auto corpus = random_pairs(60, 40, 3, 10, 5);
  auto m = train_toy(corpus, 40);
  DatastoreOptions o;
  o.chunk_size = 16;
  o.d_key = 8;
  o.d_cache = 4;
  o.threads = 1;
  auto ds = build_datastore(m, corpus, o);
  return {std::move(m), std::move(ds)};
}

// A hand-made chunk whose non-PAD positions point at consecutive states.
struct OwnedChunk {
  TokenSeq tokens;
  std::vector<std::uint64_t> refs;
  ChunkView view() const { return {tokens, refs}; }
};

OwnedChunk chunk_of(const TokenSeq& tokens, std::uint64_t first_ref) {
  OwnedChunk c{tokens, {}};
  for (TokenId t : tokens) c.refs.push_back(t == kPad ? kPadStateRef : first_ref++);
  return c;
}

}  // namespace

TEST(NeighborsCache, PadPositionsSkipped) {
  auto s = make_store();
  NeighborsCache cache(CacheScope::kSentenceLevel, s.ds.d_cache());
  auto c = chunk_of({5, 6, kPad}, 3);
  std::vector<ChunkView> views{c.view()};
  cache.insert_chunks(views, s.ds);
  ASSERT_EQ(cache.size(), 2u);
  EXPECT_EQ(cache.entry(0).value, 5u);
  EXPECT_EQ(cache.entry(1).value, 6u);
  auto st = s.ds.state(4);
  EXPECT_TRUE(std::equal(st.begin(), st.end(), cache.entry(1).key.begin()));
}

TEST(NeighborsCache, SentenceLevelAccumulatesWithDuplicates) {
  auto s = make_store();
  NeighborsCache cache(CacheScope::kSentenceLevel, s.ds.d_cache());
  // Five retrieval steps of eight full 16-token chunks; repeats are kept.
  std::vector<OwnedChunk> owned;
  for (int i = 0; i < 8; ++i) owned.push_back(chunk_of(TokenSeq(16, 4 + i), i));
  std::vector<ChunkView> eight;
  for (const auto& o : owned) eight.push_back(o.view());
  for (int step = 0; step < 5; ++step) {
    cache.insert_chunks(eight, s.ds, step % 2);
    EXPECT_EQ(cache.size(), (step + 1) * 8u * 16u);
  }
  EXPECT_EQ(cache.size(), 640u);
}

TEST(NeighborsCache, RetrievalScopesReplacePerOrigin) {
  auto s = make_store();
  for (auto scope : {CacheScope::kSingleChunk, CacheScope::kBeamBatch}) {
    NeighborsCache cache(scope, s.ds.d_cache());
    auto a = chunk_of({4, 5, 6}, 0);
    auto b = chunk_of({7, 8}, 10);
    std::vector<ChunkView> va{a.view()}, vb{b.view()};
    cache.insert_chunks(va, s.ds, 0);
    cache.insert_chunks(vb, s.ds, 1);
    EXPECT_EQ(cache.size(), 5u);
    cache.insert_chunks(vb, s.ds, 0);
    EXPECT_EQ(cache.size(), 4u);
    for (std::size_t i = 0; i < cache.size(); ++i) EXPECT_NE(cache.entry(i).value, 4u);
  }
}

TEST(NeighborsCache, MaxPositionsTruncates) {
  auto s = make_store();
  NeighborsCache cache(CacheScope::kSentenceLevel, s.ds.d_cache());
  auto c = chunk_of({4, 5, 6, 7}, 0);
  std::vector<ChunkView> v{c.view()};
  cache.insert_chunks(v, s.ds, 0, 2);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(NeighborsCache, SearchMatchesNaiveOracle) {
  auto s = make_store();
  NeighborsCache cache(CacheScope::kSentenceLevel, s.ds.d_cache());
  std::vector<ChunkView> views;
  for (EntryId e = 0; e < 30; ++e) views.push_back(s.ds.chunk(e));
  cache.insert_chunks(views, s.ds);
  std::vector<float> keys;
  for (std::size_t i = 0; i < cache.size(); ++i) {
    auto k = cache.entry(i).key;
    keys.insert(keys.end(), k.begin(), k.end());
  }
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g(0.f, 1.f);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<float> q(s.ds.d_cache());
    for (auto& x : q) x = g(rng);
    auto got = cache.search(q, 8);
    auto want = oracle::brute_force_topk(keys, s.ds.d_cache(), q.data(), 8);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, want[i].id);
      EXPECT_NEAR(got[i].distance, want[i].distance, 1e-4);
    }
    EXPECT_EQ(cache.search(q, cache.size() + 5).size(), cache.size());
  }
}

TEST(NeighborsCache, ResetEmptiesAndIsIdempotent) {
  auto s = make_store();
  NeighborsCache cache(CacheScope::kBeamBatch, s.ds.d_cache());
  auto c = chunk_of({4, 5}, 0);
  std::vector<ChunkView> v{c.view()};
  cache.insert_chunks(v, s.ds);
  cache.reset();
  EXPECT_TRUE(cache.empty());
  cache.reset();
  EXPECT_EQ(cache.size(), 0u);
  std::vector<float> q(s.ds.d_cache());
  EXPECT_EQ(code_of([&] { cache.search(q, 1); }), Errc::kEmptyCache);
}

TEST(NeighborsCache, CapacityEvictsOldest) {
  auto s = make_store();
  NeighborsCache cache(CacheScope::kSentenceLevel, s.ds.d_cache(), 3);
  auto a = chunk_of({4, 5}, 0);
  auto b = chunk_of({6, 7}, 5);
  std::vector<ChunkView> va{a.view()}, vb{b.view()};
  cache.insert_chunks(va, s.ds);
  cache.insert_chunks(vb, s.ds);
  ASSERT_EQ(cache.size(), 3u);
  EXPECT_EQ(cache.entry(0).value, 5u);
  EXPECT_EQ(cache.entry(2).value, 7u);
}

TEST(NeighborsCache, Errors) {
  auto s = make_store();
  NeighborsCache cache(CacheScope::kSentenceLevel, s.ds.d_cache());
  OwnedChunk broken{{4, 5}, {0, kPadStateRef}};
  std::vector<ChunkView> v{broken.view()};
  EXPECT_EQ(code_of([&] { cache.insert_chunks(v, s.ds); }), Errc::kSentinelDereference);
  NeighborsCache wrong(CacheScope::kSentenceLevel, s.ds.d_cache() + 1);
  auto ok = chunk_of({4}, 0);
  std::vector<ChunkView> vo{ok.view()};
  EXPECT_EQ(code_of([&] { wrong.insert_chunks(vo, s.ds); }), Errc::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { NeighborsCache(CacheScope::kSentenceLevel, 0); }),
            Errc::kInvalidArgument);
  EXPECT_EQ(code_of([&] { NeighborsCache(CacheScope::kSentenceLevel, 4, 0); }),
            Errc::kInvalidArgument);
}

TEST(NeighborsCache, ScopeNames) {
  for (auto scope : {CacheScope::kSingleChunk, CacheScope::kBeamBatch, CacheScope::kSentenceLevel}) {
    EXPECT_EQ(parse_cache_scope(to_string(scope)), scope);
  }
  EXPECT_FALSE(parse_cache_scope("global").has_value());
}
