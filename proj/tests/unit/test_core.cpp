#include <chunkstore/chunkstore.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
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

ProbDist dist(std::vector<ProbDist::Entry> entries) {
  return ProbDist::from_sorted(std::move(entries));
}

}  // namespace

TEST(RetrievalDistribution, SingleNeighborGetsUnitMass) {
  std::vector<ScoredToken> n{{0.0, 7}};
  auto p = retrieval_distribution(n, 10.0);
  EXPECT_EQ(p.support_size(), 1u);
  EXPECT_DOUBLE_EQ(p.prob(7), 1.0);
}

TEST(RetrievalDistribution, EqualDistancesSplitEvenly) {
  for (double t : {0.1, 1.0, 100.0}) {
    std::vector<ScoredToken> n{{0.0, 4}, {0.0, 9}};
    auto p = retrieval_distribution(n, t);
    EXPECT_NEAR(p.prob(4), 0.5, 1e-15);
    EXPECT_NEAR(p.prob(9), 0.5, 1e-15);
  }
}

TEST(RetrievalDistribution, LogTwoGapGivesTwoToOne) {
  const double t = 10.0;
  std::vector<ScoredToken> n{{0.0, 4}, {t * std::log(2.0), 9}};
  auto p = retrieval_distribution(n, t);
  EXPECT_NEAR(p.prob(4), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.prob(9), 1.0 / 3.0, 1e-12);
}

TEST(RetrievalDistribution, AggregatesRepeatedTokens) {
  std::vector<ScoredToken> n{{1.0, 5}, {1.0, 5}, {1.0, 6}};
  auto p = retrieval_distribution(n, 1.0);
  EXPECT_NEAR(p.prob(5), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(p.prob(8), 0.0);
}

TEST(RetrievalDistribution, Errors) {
  std::vector<ScoredToken> none;
  EXPECT_EQ(code_of([&] { retrieval_distribution(none, 1.0); }), Errc::kEmptyNeighborSet);
  std::vector<ScoredToken> one{{0.0, 4}};
  EXPECT_EQ(code_of([&] { retrieval_distribution(one, 0.0); }), Errc::kNonPositiveTemperature);
  EXPECT_EQ(code_of([&] { retrieval_distribution(one, -2.0); }), Errc::kNonPositiveTemperature);
}

TEST(RetrievalDistribution, PermutationInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredToken> n;
    for (int i = 0; i < 8; ++i) n.push_back({d(rng), static_cast<TokenId>(4 + rng() % 5)});
    auto p = retrieval_distribution(n, 7.0);
    std::shuffle(n.begin(), n.end(), rng);
    auto q = retrieval_distribution(n, 7.0);
    EXPECT_EQ(p, q);
  }
}

TEST(RetrievalDistribution, ScaleInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.0, 30.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredToken> n, m;
    const double s = 0.1 + static_cast<double>(trial);
    for (int i = 0; i < 8; ++i) {
      const double x = d(rng);
      const TokenId tok = static_cast<TokenId>(4 + rng() % 6);
      n.push_back({x, tok});
      m.push_back({x * s, tok});
    }
    auto p = retrieval_distribution(n, 3.0);
    auto q = retrieval_distribution(m, 3.0 * s);
    ASSERT_EQ(p.support_size(), q.support_size());
    for (std::size_t i = 0; i < p.entries().size(); ++i) {
      EXPECT_EQ(p.entries()[i].first, q.entries()[i].first);
      EXPECT_NEAR(p.entries()[i].second, q.entries()[i].second, 1e-9);
    }
  }
}

TEST(RetrievalDistribution, HugeDistancesStayNormalized) {
  std::vector<ScoredToken> n{{1e6, 4}, {1e6 + 1.0, 5}};
  auto p = retrieval_distribution(n, 1.0);
  EXPECT_TRUE(p.is_valid(1e-12));
  EXPECT_GT(p.prob(4), p.prob(5));
}

TEST(Interpolate, WorkedExample) {
  auto pm = dist({{4, 0.5}, {5, 0.5}});
  auto pr = dist({{4, 1.0}});
  auto p = interpolate(pm, pr, 0.7);
  EXPECT_NEAR(p.prob(4), 0.85, 1e-15);
  EXPECT_NEAR(p.prob(5), 0.15, 1e-15);
  EXPECT_TRUE(p.is_valid());
}

TEST(Interpolate, EndpointsAreExact) {
  auto pm = dist({{4, 0.25}, {5, 0.75}});
  auto pr = dist({{6, 0.1}, {7, 0.9}});
  EXPECT_EQ(interpolate(pm, pr, 0.0), pm);
  EXPECT_EQ(interpolate(pm, pr, 1.0), pr);
}

TEST(Interpolate, LambdaOutOfRange) {
  auto pm = dist({{4, 1.0}});
  EXPECT_EQ(code_of([&] { interpolate(pm, pm, -0.01); }), Errc::kLambdaOutOfRange);
  EXPECT_EQ(code_of([&] { interpolate(pm, pm, 1.01); }), Errc::kLambdaOutOfRange);
  EXPECT_EQ(code_of([&] { interpolate(pm, pm, std::nan("")); }), Errc::kLambdaOutOfRange);
}

TEST(Interpolate, SymmetricUnderSwap) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(12), b(12);
    for (int i = 4; i < 12; ++i) {
      a[i] = u(rng);
      b[i] = (i % 3 == 0) ? 0.0 : u(rng);
    }
    double sa = 0, sb = 0;
    for (double x : a) sa += x;
    for (double x : b) sb += x;
    for (auto& x : a) x /= sa;
    for (auto& x : b) x /= sb;
    auto p = ProbDist::from_dense(a), q = ProbDist::from_dense(b);
    const double lam = u(rng);
    auto x = interpolate(p, q, lam), y = interpolate(q, p, 1.0 - lam);
    for (TokenId t = 0; t < 12; ++t) EXPECT_NEAR(x.prob(t), y.prob(t), 1e-12);
    EXPECT_TRUE(x.is_valid(1e-9));
  }
}

TEST(ProbDist, ArgmaxTieBreaksOnSmallestId) {
  auto p = dist({{3, 0.25}, {8, 0.375}, {9, 0.375}});
  EXPECT_EQ(p.argmax(), 8u);
  auto top = p.top(2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].first, 8u);
  EXPECT_EQ(top[1].first, 9u);
}

TEST(ProbDist, FromDenseDropsZeros) {
  std::vector<double> d{0.0, 0.5, 0.0, 0.5};
  auto p = ProbDist::from_dense(d);
  EXPECT_EQ(p.support_size(), 2u);
  EXPECT_TRUE(p.is_valid());
  EXPECT_EQ(ProbDist::point_mass(6).prob(6), 1.0);
}

TEST(ProbDist, ValidityDetectsBadMass) {
  EXPECT_FALSE(dist({{1, 0.7}}).is_valid());
  EXPECT_FALSE(dist({{1, 1.2}, {2, -0.2}}).is_valid());
}

TEST(SqL2, BasicCases) {
  std::vector<float> a{1.f, 0.f}, b{0.f, 1.f};
  EXPECT_EQ(sq_l2(a, a), 0.0);
  EXPECT_EQ(sq_l2(a, b), 2.0);
  std::vector<float> c{1.f};
  EXPECT_EQ(code_of([&] { sq_l2(a, c); }), Errc::kDimensionMismatch);
}

TEST(SqL2, MatchesNaiveLoop) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g(0.f, 3.f);
  for (std::size_t dim : {1u, 7u, 8u, 31u, 64u, 65u}) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<float> a(dim), b(dim);
      for (auto& x : a) x = g(rng);
      for (auto& x : b) x = g(rng);
      const double ref = oracle::sq_l2(a.data(), b.data(), dim);
      EXPECT_NEAR(sq_l2(a, b), ref, 1e-6 * std::max(1.0, ref));
      EXPECT_NEAR(sq_l2_f32(a.data(), b.data(), dim), ref, 1e-5 * std::max(1.0, ref));
    }
  }
}

TEST(Vocab, ReservedIdsAndRoundTrip) {
  Vocab v;
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.token(kPad), "<pad>");
  EXPECT_EQ(v.token(kBos), "<s>");
  EXPECT_EQ(v.token(kEos), "</s>");
  EXPECT_EQ(v.token(kUnk), "<unk>");
  EXPECT_EQ(v.add("hello"), 4u);
  EXPECT_EQ(v.add("world"), 5u);
  EXPECT_EQ(v.add("hello"), 4u);
  EXPECT_EQ(v.lookup("missing"), kUnk);
  EXPECT_EQ(v.encode("hello  world\tzzz"), (TokenSeq{4, 5, kUnk}));
  EXPECT_EQ(v.decode({kBos, 4, 5, kEos}), "hello world");

  const auto path = fixtures::temp_path("vocab.txt");
  v.save(path);
  EXPECT_EQ(Vocab::load(path), v);
}

TEST(Vocab, RejectsBadReservedLines) {
  const auto path = fixtures::temp_path("bad_vocab.txt");
  {
    std::ofstream out(path);
    out << "<s>\n<pad>\n</s>\n<unk>\nx\n";
  }
  EXPECT_EQ(code_of([&] { Vocab::load(path); }), Errc::kInvalidVocab);
  {
    std::ofstream out(path);
    out << "<pad>\n<s>\n</s>\n<unk>\nx\nx\n";
  }
  EXPECT_EQ(code_of([&] { Vocab::load(path); }), Errc::kInvalidVocab);
  EXPECT_EQ(code_of([&] { Vocab::load(fixtures::temp_path("nope/none.txt")); }), Errc::kIoError);
}

TEST(SentencePair, Validation) {
  EXPECT_NO_THROW(validate_pair({{4, 5}, {6, kEos}}));
  EXPECT_EQ(code_of([] { validate_pair({{}, {6, kEos}}); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([] { validate_pair({{4}, {6}}); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([] { validate_pair({{4}, {kEos, 6, kEos}}); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([] { validate_pair({{4, kPad}, {6, kEos}}); }), Errc::kInvalidArgument);
}

TEST(MixParams, Validation) {
  MixParams m;
  EXPECT_NO_THROW(m.validate());
  m.lambda_cache = 1.5;
  EXPECT_EQ(code_of([&] { m.validate(); }), Errc::kLambdaOutOfRange);
  m = {};
  m.temp_cache = 0.0;
  EXPECT_EQ(code_of([&] { m.validate(); }), Errc::kNonPositiveTemperature);
  m = {};
  m.k = 0;
  EXPECT_EQ(code_of([&] { m.validate(); }), Errc::kInvalidArgument);
}

TEST(Error, MessageCarriesCodeName) {
  Error e(Errc::kBadMagic, "oops");
  EXPECT_EQ(e.code(), Errc::kBadMagic);
  EXPECT_NE(std::string(e.what()).find("BadMagic"), std::string::npos);
  EXPECT_EQ(errc_name(Errc::kEmptyCache), "EmptyCache");
}
