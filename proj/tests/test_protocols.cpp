#include <gtest/gtest.h>

#include "pufcom/error.hpp"
#include "pufcom/protocols.hpp"
#include "pufcom/uccompiler.hpp"

using namespace pufcom;
using namespace pufcom::proto;

namespace {

struct Harness {
  std::unique_ptr<Session> s;
  std::unique_ptr<MultiCommitter> com;
  std::unique_ptr<MultiVerifier> ver;
  std::unique_ptr<CommitterParty> cp;
  std::unique_ptr<VerifierParty> vp;

  Harness(std::unique_ptr<MultiCommitter> c, std::unique_ptr<MultiVerifier> v, std::uint64_t seed)
      : com(std::move(c)), ver(std::move(v)) {
    s = std::make_unique<Session>(std::make_unique<func::ComMpufFunctionality>(func::CommBudget{}, seed), seed + 1);
    cp = std::make_unique<CommitterParty>(*com);
    vp = std::make_unique<VerifierParty>(*ver);
    s->attach(Party::kP1, cp.get());
    s->attach(Party::kP2, vp.get());
  }
  void commit() {
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

void expect_opens_to(Harness& r, const std::vector<BitString>& xs) {
  r.commit();
  ASSERT_TRUE(r.ver->committed());
  ASSERT_FALSE(r.ver->failure().has_value()) << *r.ver->failure();
  r.open();
  const auto& v = r.ver->verdicts();
  ASSERT_EQ(v.size(), xs.size());
  for (const auto& verdict : v) {
    EXPECT_TRUE(verdict.accepted) << verdict.reason;
    EXPECT_EQ(verdict.value, xs.at(verdict.index));
  }
}

std::vector<BitString> values(Rng& rng, std::size_t count, std::size_t len) {
  std::vector<BitString> xs;
  for (std::size_t i = 0; i < count; ++i) xs.push_back(BitString::random(rng, len));
  return xs;
}

}  // namespace

TEST(Params, MaskCommit) {
  const auto st = BitString::from_bits("000000");
  const auto x = BitString::from_bits("10");
  EXPECT_EQ(mask_commit(st, x, BitString::from_bits("111111")).to_bits(), "101010");
  EXPECT_EQ(mask_commit(st, x, BitString::from_bits("110011")).to_bits(), "100010");
  EXPECT_EQ(mask_commit(BitString::from_bits("111"), BitString::from_bits("1"), BitString::from_bits("010")).to_bits(),
            "101");
  EXPECT_THROW(mask_commit(st, BitString::from_bits("1011"), BitString(6)), Error);
}

TEST(Params, IndexEncoding) {
  for (std::size_t i : {0u, 1u, 7u, 255u, 100000u}) {
    EXPECT_EQ(encode_index(i).size(), 32u);
    EXPECT_EQ(decode_index(encode_index(i)), i);
  }
  EXPECT_THROW(decode_index(BitString(8)), Error);
}

TEST(Params, FamiliesMatch) {
  const auto c = make_cpuf_params(16, 2);
  EXPECT_EQ(c.token.fe.out_len, 2u * 3 * 16);
  EXPECT_TRUE(fe::check_matching(c.token.fe, c.token.puf));
  const auto e = make_extpuf_params(16, 2, 3);
  EXPECT_EQ(e.token.fe.out_len, 32u);
  EXPECT_EQ(e.ext.puf.n, 32u * 3);
  EXPECT_EQ(e.code().params().code_len, e.ext.puf.n);
  EXPECT_TRUE(fe::check_matching(e.ext.fe, e.ext.puf));
  const auto o = make_original_params(8, 1);
  EXPECT_EQ(o.l(), 24u);
  EXPECT_EQ(o.code().params().code_len, o.ext.puf.n);
  EXPECT_THROW(make_family(8, 8, 0, 2), Error);
}

TEST(Completeness, SingleToken) {
  Rng rng(31);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = make_cpuf_params(16, 2, 5);
    const auto x = BitString::random(rng, 2);
    Harness r(std::make_unique<CpufCommitter>(Party::kP1, "cpuf", p, x), std::make_unique<CpufVerifier>(Party::kP2, "cpuf", p),
          seed);
    expect_opens_to(r, {x});
  }
}

TEST(Completeness, TwoTokenSingleAndCollective) {
  Rng rng(32);
  for (std::size_t count : {1u, 4u}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto p = make_extpuf_params(16, 2, count, 5);
      const auto xs = values(rng, count, 2);
      Harness r(std::make_unique<CollCommitter>(Party::kP1, "x", p, xs), std::make_unique<CollVerifier>(Party::kP2, "x", p),
            seed);
      expect_opens_to(r, xs);
    }
  }
}

TEST(Completeness, PerString) {
  Rng rng(33);
  const auto p = make_extpuf_params(16, 1, 1, 5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto xs = values(rng, 3, 1);
    Harness r(std::make_unique<PerStringCommitter>(Party::kP1, "ps", p, xs),
          std::make_unique<PerStringVerifier>(Party::kP2, "ps", p, 3), seed);
    expect_opens_to(r, xs);
    EXPECT_EQ(count_created_tokens(r.s->functionality().log()), 6u);
  }
}

TEST(Completeness, ThreeTokenOriginal) {
  Rng rng(34);
  const auto p = make_original_params(16, 1, 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = BitString::random(rng, 1);
    Harness r(std::make_unique<OriginalCommitter>(Party::kP1, "orig", p, x),
          std::make_unique<OriginalVerifier>(Party::kP2, "orig", p), seed);
    expect_opens_to(r, {x});
  }
}

TEST(Protocols, CollectiveWithOneStringIsTheSingleProtocol) {
  // a per-string run of one string does exactly what the collective run does
  const auto p = make_extpuf_params(16, 2, 1, 5);
  const std::vector<BitString> xs{BitString::from_bits("10")};
  Harness a(std::make_unique<CollCommitter>(Party::kP1, "x", p, xs), std::make_unique<CollVerifier>(Party::kP2, "x", p), 7);
  Harness b(std::make_unique<PerStringCommitter>(Party::kP1, "x", p, xs),
        std::make_unique<PerStringVerifier>(Party::kP2, "x", p, 1), 7);
  a.commit();
  b.commit();
  a.open();
  b.open();
  EXPECT_EQ(a.s->event_log_text(), b.s->event_log_text());
  EXPECT_EQ(a.s->resources().exchange_phases, b.s->resources().exchange_phases);
}

TEST(Protocols, OpeningToWrongValueRejected) {
  const auto p = make_cpuf_params(16, 2, 5);
  struct Liar : CpufCommitter {
    using CpufCommitter::CpufCommitter;
    void open(Session& s, const std::vector<std::size_t>&) override { send_opening(s, chal_, ~x_); }
  };
  Harness r(std::make_unique<Liar>(Party::kP1, "cpuf", p, BitString::from_bits("01")),
        std::make_unique<CpufVerifier>(Party::kP2, "cpuf", p), 3);
  r.commit();
  r.open();
  ASSERT_EQ(r.ver->verdicts().size(), 1u);
  EXPECT_FALSE(r.ver->verdicts()[0].accepted);
}

TEST(Session, ExchangePhaseCount) {
  using func::EventRecord;
  auto rec = [](std::string kind) {
    EventRecord e;
    e.kind = std::move(kind);
    return e;
  };
  std::vector<EventRecord> log{rec("init"), rec("handover"), rec("ready"), rec("received"), rec("eval"),
                               rec("handover"), rec("handover"), rec("ready"), rec("init-malicious")};
  EXPECT_EQ(count_exchange_phases(log), 2u);
  EXPECT_EQ(count_created_tokens(log), 2u);
  EXPECT_EQ(count_exchange_phases({}), 0u);
}

TEST(Blobs, EqualityCheck) {
  Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t pairs = 1 + rng.below(8);
    uc::BlobState st;
    for (std::size_t j = 0; j < 2 * pairs; ++j) {
      st.share0.push_back(rng.bit());
      st.share1.push_back(rng.bit());
    }
    // make pair 0 unequal and all other pairs equal
    for (std::size_t i = 0; i < pairs; ++i) {
      const bool want_equal = i != 0;
      if ((st.blob(2 * i) == st.blob(2 * i + 1)) != want_equal) st.share1[2 * i + 1] = !st.share1[2 * i + 1];
    }
    st.y = uc::honest_y(st);
    std::size_t passes = 0;
    for (bool e0 : {false, true}) {
      std::vector<bool> e(pairs);
      for (std::size_t i = 1; i < pairs; ++i) e[i] = rng.bit();
      e[0] = e0;
      passes += uc::blob_equalities_check(st, e);
    }
    ASSERT_EQ(passes, 1u);
  }
  EXPECT_EQ(uc::share_index(3, true), 7u);
  EXPECT_EQ(uc::share_index(0, false), 0u);
}
