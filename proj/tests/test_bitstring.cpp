#include <gtest/gtest.h>

#include <vector>

#include "pufcom/bitstring.hpp"
#include "pufcom/error.hpp"
#include "pufcom/rng.hpp"

using pufcom::BitString;
using pufcom::Rng;

namespace {

// plain vector<bool> reference
using Ref = std::vector<bool>;

Ref ref_of(const BitString& b) {
  Ref r(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = b.get(i);
  return r;
}

BitString from_ref(const Ref& r) {
  BitString b(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) b.set(i, r[i]);
  return b;
}

Ref random_ref(Rng& rng, std::size_t n) {
  Ref r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = rng.bit();
  return r;
}

}  // namespace

TEST(BitString, LiteralsRoundTrip) {
  const auto b = BitString::from_bits("1101");
  EXPECT_EQ(b.size(), 4u);
  EXPECT_TRUE(b.get(0));
  EXPECT_FALSE(b.get(2));
  EXPECT_EQ(b.to_bits(), "1101");
  EXPECT_EQ(b.to_uint(), 0b1011u);
  EXPECT_EQ(BitString::from_uint(0b1011, 4), b);
  EXPECT_EQ(BitString::from_hex(b.to_hex()), b);
  EXPECT_EQ(BitString::from_bits("").size(), 0u);
}

TEST(BitString, HexFormatIsLengthPrefixed) {
  EXPECT_EQ(BitString::from_bits("10000000").to_hex(), "8:01");
  EXPECT_EQ(BitString::from_bits("0000000011").to_hex(), "10:0003");
  EXPECT_THROW(BitString::from_hex("zz"), pufcom::Error);
}

TEST(BitString, MismatchedLengthsThrow) {
  BitString a(5), b(6);
  try {
    (void)(a ^ b);
    FAIL();
  } catch (const pufcom::Error& e) {
    EXPECT_EQ(e.code(), "LEN_MISMATCH");
  }
  EXPECT_THROW((void)(a & b), pufcom::Error);
  EXPECT_THROW((void)hamming_distance(a, b), pufcom::Error);
}

TEST(BitString, OperationsAgreeWithReference) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    const Ref a = random_ref(rng, n), b = random_ref(rng, n);
    const BitString A = from_ref(a), B = from_ref(b);
    Ref x(n), y(n), z(n);
    std::size_t pop = 0, dist = 0;
    bool dot = false;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a[i] != b[i];
      y[i] = a[i] && b[i];
      z[i] = !a[i];
      pop += a[i];
      dist += a[i] != b[i];
      dot ^= a[i] && b[i];
    }
    ASSERT_EQ(ref_of(A ^ B), x);
    ASSERT_EQ(ref_of(A & B), y);
    ASSERT_EQ(ref_of(~A), z);
    ASSERT_EQ(A.popcount(), pop);
    ASSERT_EQ(hamming_distance(A, B), dist);
    ASSERT_EQ(A.dot(B), dot);
    ASSERT_EQ(A.parity(), pop % 2 == 1);
    ASSERT_EQ(A.all_zero(), pop == 0);

    const std::size_t pos = rng.below(n), len = rng.below(n - pos + 1);
    ASSERT_EQ(ref_of(A.slice(pos, len)), Ref(a.begin() + pos, a.begin() + pos + len));
    Ref cat = a;
    cat.insert(cat.end(), b.begin(), b.end());
    ASSERT_EQ(ref_of(A.concat(B)), cat);
    ASSERT_EQ(BitString::from_hex(A.to_hex()), A);
    ASSERT_EQ(BitString::from_bytes(A.to_bytes().data(), n), A);
  }
}

TEST(BitString, DotAtIsParityOfWindow) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t olen = 1 + rng.below(70);
    const std::size_t n = olen + rng.below(100);
    const Ref a = random_ref(rng, n), o = random_ref(rng, olen);
    const std::size_t pos = rng.below(n - olen + 1);
    bool want = false;
    for (std::size_t i = 0; i < olen; ++i) want ^= a[pos + i] && o[i];
    ASSERT_EQ(from_ref(a).dot_at(pos, from_ref(o)), want);
  }
}

TEST(BitString, RepeatTilesWholeString) {
  const auto x = BitString::from_bits("10");
  EXPECT_EQ(x.repeat(3).to_bits(), "101010");
  EXPECT_EQ(x.repeat(0).size(), 0u);
}

TEST(BitString, OrderingIsStrictWeak) {
  const auto a = BitString::from_bits("01"), b = BitString::from_bits("10"), c = BitString::from_bits("100");
  EXPECT_NE(a < b, b < a);
  EXPECT_FALSE(a < a);
  EXPECT_TRUE(a < c || c < a);
}

TEST(BitString, TailBitsStayClear) {
  BitString a(70, true);
  const BitString b = ~BitString(70);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.popcount(), 70u);
  EXPECT_EQ((~a).popcount(), 0u);
}

TEST(Rng, SeedsAreReproducibleAndSeparated) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(pufcom::mix_seed(1, 0), pufcom::mix_seed(1, 1));
  EXPECT_NE(pufcom::mix_seed(1, "a"), pufcom::mix_seed(1, "b"));
  EXPECT_EQ(pufcom::mix_seed(9, "x"), pufcom::mix_seed(9, "x"));
  Rng c(3);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(c.below(7), 7u);
}
