#include <gtest/gtest.h>

#include "pufcom/adversaries.hpp"
#include "pufcom/error.hpp"
#include "pufcom/extractors.hpp"
#include "pufcom/protocols.hpp"

using namespace pufcom;
using namespace pufcom::proto;

namespace {

template <class V>
struct Driver {
  std::unique_ptr<Session> s;
  std::unique_ptr<MultiCommitter> com;
  std::unique_ptr<V> ver;
  std::unique_ptr<CommitterParty> cp;
  std::unique_ptr<VerifierParty> vp;

  Driver(std::unique_ptr<MultiCommitter> c, std::unique_ptr<V> v, std::uint64_t seed) : com(std::move(c)), ver(std::move(v)) {
    s = std::make_unique<Session>(std::make_unique<func::ComMpufFunctionality>(func::CommBudget{}, seed), seed + 1);
    cp = std::make_unique<CommitterParty>(*com);
    vp = std::make_unique<VerifierParty>(*ver);
    s->attach(Party::kP1, cp.get());
    s->attach(Party::kP2, vp.get());
    s->post(Party::kP1, Event{});
    s->post(Party::kP2, Event{});
    s->run();
  }
  void open() {
    Event ev;
    ev.kind = Event::Kind::kCommand;
    ev.message.name = "open";
    s->post(Party::kP1, ev);
    s->run();
  }
};

}  // namespace

TEST(ExtractFromQuery, OneBlockTruthTable) {
  const auto b = [](const char* s) { return BitString::from_bits(s); };
  // r = 0: c matches st and st^r alike, or neither
  EXPECT_FALSE(extract::extract_from_query(b("0"), b("0"), b("0"), 1));
  EXPECT_FALSE(extract::extract_from_query(b("0"), b("1"), b("0"), 1));
  EXPECT_EQ(extract::extract_from_query(b("0"), b("0"), b("1"), 1)->to_bits(), "0");
  EXPECT_EQ(extract::extract_from_query(b("0"), b("1"), b("1"), 1)->to_bits(), "1");
  EXPECT_EQ(extract::extract_from_query(b("1"), b("1"), b("1"), 1)->to_bits(), "0");
  EXPECT_EQ(extract::extract_from_query(b("1"), b("0"), b("1"), 1)->to_bits(), "1");
  // one bad block spoils the whole string
  EXPECT_FALSE(extract::extract_from_query(b("0000"), b("0010"), b("1111"), 2));
  EXPECT_EQ(extract::extract_from_query(b("0000"), b("0101"), b("1111"), 2)->to_bits(), "01");
  EXPECT_THROW(extract::extract_from_query(b("000"), b("000"), b("000"), 2), Error);
  EXPECT_THROW(extract::extract_from_query(b("00"), b("000"), b("000"), 1), Error);
}

TEST(ExtractFromQuery, RecoversMaskedValue) {
  Rng rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 1 + rng.below(6), reps = 1 + rng.below(8);
    const BitString st = BitString::random(rng, k * reps);
    const BitString x = BitString::random(rng, k);
    BitString r = BitString::random(rng, k * reps);
    bool covered = true;
    for (std::size_t j = 0; j < k; ++j) {
      bool any = false;
      for (std::size_t p = j; p < r.size(); p += k) any = any || r.get(p);
      covered = covered && any;
    }
    const auto got = extract::extract_from_query(st, mask_commit(st, x, r), r, k);
    if (covered) {
      ASSERT_TRUE(got.has_value());
      ASSERT_EQ(*got, x);
    } else {
      ASSERT_FALSE(got.has_value());
    }
  }
}

TEST(Extract, HonestTwoTokenCommitter) {
  Rng rng(42);
  for (std::size_t count : {1u, 3u}) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto p = make_extpuf_params(16, 2, count, 5);
      std::vector<BitString> xs;
      for (std::size_t i = 0; i < count; ++i) xs.push_back(BitString::random(rng, 2));
      Driver<CollVerifier> r(std::make_unique<CollCommitter>(Party::kP1, "x", p, xs),
                          std::make_unique<CollVerifier>(Party::kP2, "x", p), seed);
      ASSERT_TRUE(r.ver->committed());
      const auto got = extract::extract(r.s->functionality(), r.ver->view(), p.code());
      ASSERT_EQ(got.size(), count);
      for (std::size_t i = 0; i < count; ++i) {
        ASSERT_TRUE(got[i].has_value());
        EXPECT_EQ(*got[i], xs[i]);
      }
      // queries after the commitment do not count
      const auto before = extract::queries_to(r.s->functionality(), r.ver->view().ext_sid, Party::kP1,
                                              r.ver->view().commit_end_step);
      r.open();
      EXPECT_EQ(extract::queries_to(r.s->functionality(), r.ver->view().ext_sid, Party::kP1,
                                    r.ver->view().commit_end_step)
                    .size(),
                before.size());
    }
  }
}

TEST(Extract, DoubleQueryDefeatsOriginalExtractor) {
  const auto p = make_original_params(16, 1, 3);
  int reproduced = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Driver<OriginalVerifier> r(adv::make_original_committer("double-query-sender", p, BitString::from_bits("0")),
                            std::make_unique<OriginalVerifier>(Party::kP2, "orig", p), seed);
    ASSERT_TRUE(r.ver->committed());
    const auto got = extract::extract(r.s->functionality(), r.ver->view(), p.code());
    ASSERT_EQ(got.size(), 1u);
    r.open();
    const auto& v = r.ver->verdicts();
    if (!got[0] && v.size() == 1 && v[0].accepted && v[0].value.to_bits() == "0") ++reproduced;
  }
  EXPECT_EQ(reproduced, 20);
}

TEST(Extract, IncompleteViewGivesNothing) {
  func::ComMpufFunctionality f({}, 1);
  CommitView view;
  view.c.resize(2);
  view.r.resize(2);
  const auto got = extract::extract(f, view, ecc::RepetitionCode(4, 3));
  ASSERT_EQ(got.size(), 2u);
  EXPECT_FALSE(got[0] || got[1]);
}
