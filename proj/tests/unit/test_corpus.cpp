#include <chunkstore/chunkstore.hpp>
#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"

using namespace chunkstore;

TEST(Corpus, LinesRoundTripAndStripCr) {
  const auto path = fixtures::temp_path("lines.txt");
  {
    std::ofstream out(path, std::ios::binary);
    out << "a b\r\nc\n\nd e f\n";
  }
  EXPECT_EQ(read_lines(path), (std::vector<std::string>{"a b", "c", "", "d e f"}));
  write_lines(path, {"x", "y z"});
  EXPECT_EQ(read_lines(path), (std::vector<std::string>{"x", "y z"}));
  EXPECT_THROW(read_lines(fixtures::temp_path("nope/none.txt")), Error);
}

TEST(Corpus, VocabFirstSeenOrder) {
  auto v = build_vocab({{"b a", "c"}, {"a d"}});
  EXPECT_EQ(v.size(), 8u);
  EXPECT_EQ(v.lookup("b"), 4u);
  EXPECT_EQ(v.lookup("a"), 5u);
  EXPECT_EQ(v.lookup("c"), 6u);
  EXPECT_EQ(v.lookup("d"), 7u);
}

TEST(Corpus, EncodeParallel) {
  auto v = build_vocab({{"s1 s2"}, {"t1 t2 t3"}});
  auto pairs = encode_parallel(v, {"s1 s2"}, {"t1 t2 t3"});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].source, (TokenSeq{4, 5}));
  EXPECT_EQ(pairs[0].target, (TokenSeq{6, 7, 8, kEos}));
  EXPECT_EQ(references_of(pairs), (std::vector<TokenSeq>{{6, 7, 8}}));
  try {
    encode_parallel(v, {"s1", "s2"}, {"t1"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kLengthMismatch);
  }
  EXPECT_THROW(encode_parallel(v, {"s1"}, {"   "}), Error);
  auto unk = encode_lines(v, {"s1 zzz"});
  EXPECT_EQ(unk[0], (TokenSeq{4, kUnk}));
}

TEST(Synthetic, PhraseDomainDeterministic) {
  PhraseDomainOptions o;
  o.source_words = 30;
  o.target_words = 30;
  o.phrases = 20;
  PhraseDomain a(o), b(o);
  auto sa = a.sample(15, 3), sb = b.sample(15, 3);
  ASSERT_EQ(sa.size(), 15u);
  for (std::size_t i = 0; i < sa.size(); ++i) {
    EXPECT_EQ(sa[i].source, sb[i].source);
    EXPECT_EQ(sa[i].target, sb[i].target);
    EXPECT_FALSE(sa[i].source.empty());
  }
  EXPECT_NE(a.sample(15, 4)[0].source + a.sample(15, 4)[1].source,
            sa[0].source + sa[1].source);
  EXPECT_EQ(a.phrase_count(), 20u);
}

TEST(Synthetic, RandomPairsAreValid) {
  auto pairs = random_pairs(100, 50, 2, 9, 1);
  ASSERT_EQ(pairs.size(), 100u);
  for (const auto& p : pairs) {
    EXPECT_NO_THROW(validate_pair(p));
    EXPECT_GE(p.target.size(), 2u);
    EXPECT_LE(p.target.size(), 9u);
    for (TokenId t : p.source) {
      EXPECT_GE(t, 4u);
      EXPECT_LT(t, 50u);
    }
  }
  Vocab v;
  auto enc = encode_text_pairs(v, {{"x y", "p q"}});
  EXPECT_EQ(enc[0].target.back(), kEos);
  EXPECT_EQ(v.size(), 8u);
}
