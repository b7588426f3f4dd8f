#include <gtest/gtest.h>

#include "pufcom/ecc.hpp"
#include "pufcom/error.hpp"
#include "pufcom/fuzzyext.hpp"

using namespace pufcom;

namespace {

// direct matrix-vector product: row i of the Hankel matrix is key[i .. i+|w|)
BitString hankel_ref(const BitString& key, const BitString& offset, const BitString& w) {
  BitString out = offset;
  for (std::size_t i = 0; i < offset.size(); ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < w.size(); ++j) acc ^= key.get(i + j) && w.get(j);
    if (acc) out.flip(i);
  }
  return out;
}

fe::FeParams fe_params(std::size_t out_len, std::size_t t, std::size_t blocks) {
  const std::size_t src = blocks * (2 * t + 1);
  return {src, out_len, t, src, 0.01};
}

BitString flip_random(BitString w, std::size_t flips, Rng& rng) {
  std::vector<std::size_t> pos(w.size());
  for (std::size_t j = 0; j < pos.size(); ++j) pos[j] = j;
  for (std::size_t j = 0; j < flips; ++j) {
    std::swap(pos[j], pos[j + rng.below(pos.size() - j)]);
    w.flip(pos[j]);
  }
  return w;
}

}  // namespace

TEST(Repetition, BitMajorLayout) {
  const ecc::RepetitionCode c(2, 3);
  EXPECT_EQ(c.encode(BitString::from_bits("10")).to_bits(), "111000");
  EXPECT_EQ(c.encode(BitString::from_bits("01")).to_bits(), "000111");
  EXPECT_EQ(c.decode(BitString::from_bits("101001")).to_bits(), "10");
  EXPECT_EQ(c.params().code_len, 6u);
  EXPECT_EQ(c.params().distance, 3u);
  EXPECT_THROW(ecc::RepetitionCode(2, 4), Error);
  EXPECT_THROW(c.encode(BitString(3)), Error);
  EXPECT_EQ(ecc::code_for_min_distance(4, 3).factor(), 5u);
}

TEST(Repetition, DecodesWithinRadius) {
  Rng rng(21);
  for (std::size_t r : {1u, 3u, 5u, 7u, 11u}) {
    const ecc::RepetitionCode c(9, r);
    const std::size_t t = (r - 1) / 2;
    for (int trial = 0; trial < 200; ++trial) {
      const BitString m = BitString::random(rng, 9);
      BitString w = c.encode(m);
      // up to t flips in every block at once
      for (std::size_t b = 0; b < 9; ++b) {
        const std::size_t f = rng.below(t + 1);
        for (std::size_t j = 0; j < f; ++j) w.flip(b * r + j);
      }
      ASSERT_EQ(c.decode(w), m);
    }
  }
}

TEST(Repetition, TooManyFlipsInOneBlockFail) {
  for (std::size_t t : {1u, 2u, 3u, 4u}) {
    const std::size_t r = 2 * t + 1;
    const ecc::RepetitionCode c(3, r);
    const BitString m = BitString::from_bits("101");
    BitString w = c.encode(m);
    for (std::size_t j = 0; j < t + (t + 1) / 2; ++j) w.flip(r + j);
    EXPECT_NE(c.decode(w), m) << t;
  }
}

TEST(FuzzyExtractor, HashMatchesMatrixProduct) {
  Rng rng(22);
  const fe::FuzzyExtractor ext(fe_params(8, 2, 8));
  for (int trial = 0; trial < 200; ++trial) {
    const BitString w = BitString::random(rng, 40);
    const auto [key, p] = ext.gen(w, rng);
    ASSERT_EQ(key, hankel_ref(p.hash_key, p.hash_offset, w));
    // w ^ sketch is a codeword: constant on every block
    const BitString c = w ^ p.sketch;
    for (std::size_t b = 0; b < 8; ++b)
      for (std::size_t j = 1; j < 5; ++j) ASSERT_EQ(c.get(b * 5 + j), c.get(b * 5));
  }
}

TEST(FuzzyExtractor, RoundTripWithinT) {
  Rng rng(23);
  for (std::size_t t : {1u, 2u, 4u}) {
    const fe::FuzzyExtractor ext(fe_params(6, t, 8));
    const std::size_t L = ext.params().source_len;
    for (int trial = 0; trial < 300; ++trial) {
      const BitString w = BitString::random(rng, L);
      const auto [key, p] = ext.gen(w, rng);
      ASSERT_EQ(ext.rep(flip_random(w, rng.below(t + 1), rng), p), key);
    }
  }
}

TEST(FuzzyExtractor, BlockOverloadChangesKey) {
  Rng rng(24);
  const std::size_t t = 3;
  const fe::FuzzyExtractor ext(fe_params(16, t, 16));
  int changed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const BitString w = BitString::random(rng, ext.params().source_len);
    const auto [key, p] = ext.gen(w, rng);
    BitString w2 = w;
    for (std::size_t j = 0; j < t + (t + 1) / 2; ++j) w2.flip(7 + j);
    changed += ext.rep(w2, p) != key;
  }
  EXPECT_EQ(changed, 100);
}

TEST(FuzzyExtractor, HelperDataFlattening) {
  Rng rng(25);
  const fe::FuzzyExtractor ext(fe_params(5, 1, 7));
  const auto [key, p] = ext.gen(BitString::random(rng, 21), rng);
  EXPECT_EQ(p.flatten().size(), ext.helper_bits());
  EXPECT_EQ(ext.helper_bits(), 2u * 21 + 2 * 5 - 1);
  EXPECT_EQ(ext.unflatten(p.flatten()), p);
  EXPECT_THROW(ext.unflatten(BitString(3)), Error);
  EXPECT_THROW(ext.rep(BitString(20), p), Error);
}

TEST(FuzzyExtractor, RejectsBadParams) {
  EXPECT_THROW(fe::FuzzyExtractor(fe::FeParams{20, 2, 3, 20, 0.01}), Error);  // 20 not a multiple of 7
  EXPECT_THROW(fe::FuzzyExtractor(fe::FeParams{15, 4, 2, 15, 0.01}), Error);  // only 3 message bits
  EXPECT_THROW(fe::FuzzyExtractor(fe::FeParams{15, 0, 2, 15, 0.01}), Error);
}

TEST(Matching, Rules) {
  puf::PufParams p{16, 40, 4, 2, 40};
  EXPECT_TRUE(fe::check_matching({40, 4, 4, 40, 0.01}, p));
  EXPECT_FALSE(fe::check_matching({40, 4, 3, 40, 0.01}, p));
  EXPECT_FALSE(fe::check_matching({36, 4, 4, 40, 0.01}, p));
  EXPECT_FALSE(fe::check_matching({40, 4, 4, 39, 0.01}, p));

  const auto [pp, ff] = fe::matched_pair(16, 8, 5, 2);
  EXPECT_EQ(pp.rg, 88u);
  EXPECT_EQ(ff.source_len, 88u);
  EXPECT_TRUE(fe::check_matching(ff, pp));
  EXPECT_NO_THROW(fe::FuzzyExtractor{ff});
}

TEST(Matching, TokenReadingsReproduceKeys) {
  Rng rng(26);
  const auto [pp, ff] = fe::matched_pair(16, 8, 5, 2);
  const fe::FuzzyExtractor ext(ff);
  for (int trial = 0; trial < 300; ++trial) {
    const auto token = puf::sample_puf(pp, rng);
    const BitString s = BitString::random(rng, 16);
    const auto [key, p] = ext.gen(token.eval(s, rng), rng);
    ASSERT_EQ(ext.rep(token.eval(s, rng), p), key);
  }
}
