#include <gtest/gtest.h>

#include "pufcom/error.hpp"
#include "pufcom/functionality.hpp"

using namespace pufcom;
using namespace pufcom::func;
using Kind = Delivery::Kind;

namespace {

puf::PufParams fam() { return {8, 16, 3, 2, 8}; }

InitMsg honest_init(Sid sid, Party creator) {
  InitMsg m;
  m.sid = sid;
  m.creator = creator;
  m.family = fam();
  return m;
}

InitMsg malicious_init(Sid sid, Party creator, std::shared_ptr<puf::PufProgram> prog) {
  InitMsg m = honest_init(sid, creator);
  m.mode = Mode::kMalicious;
  m.program = std::move(prog);
  return m;
}

void pass(PufFunctionality& f, Sid sid, Party from, Party to) {
  f.handle(from, HandoverMsg{sid, from, to});
  f.handle(Party::kAdversary, ReadyMsg{sid});
}

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(Functionality, HandoverLifecycle) {
  ComMpufFunctionality f({}, 1);
  auto d = f.handle(Party::kP1, honest_init(1, Party::kP1));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, Kind::kInitialized);
  EXPECT_EQ(*f.owner_of(1), Party::kP1);

  // only the owner gets answers
  EXPECT_TRUE(f.handle(Party::kP2, EvalMsg{1, Party::kP2, BitString(8)}).empty());
  EXPECT_EQ(f.handle(Party::kP1, EvalMsg{1, Party::kP1, BitString(8)}).size(), 1u);

  d = f.handle(Party::kP1, HandoverMsg{1, Party::kP1, Party::kP2});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, Kind::kInvoke);
  EXPECT_EQ(d[0].to, Party::kAdversary);
  EXPECT_FALSE(f.owner_of(1).has_value());

  // in transit: nobody but the adversary may query
  EXPECT_TRUE(f.handle(Party::kP1, EvalMsg{1, Party::kP1, BitString(8)}).empty());
  EXPECT_TRUE(f.handle(Party::kP2, EvalMsg{1, Party::kP2, BitString(8)}).empty());
  EXPECT_EQ(f.handle(Party::kAdversary, EvalMsg{1, Party::kAdversary, BitString(8)}).size(), 1u);

  // receipt only after delivery
  EXPECT_TRUE(f.handle(Party::kAdversary, ReceivedMsg{1, Party::kP1}).empty());
  d = f.handle(Party::kAdversary, ReadyMsg{1});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, Kind::kHandover);
  EXPECT_EQ(d[0].to, Party::kP2);
  EXPECT_EQ(*f.owner_of(1), Party::kP2);
  d = f.handle(Party::kAdversary, ReceivedMsg{1, Party::kP1});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].to, Party::kP1);

  // duplicate sid, unknown sid and non-owner handover are logged and ignored
  EXPECT_TRUE(f.handle(Party::kP1, honest_init(1, Party::kP1)).empty());
  EXPECT_TRUE(f.handle(Party::kP1, HandoverMsg{1, Party::kP1, Party::kP2}).empty());
  EXPECT_TRUE(f.handle(Party::kAdversary, ReadyMsg{7}).empty());
  EXPECT_FALSE(f.log().back().note.empty());
  EXPECT_EQ(f.log().size(), 13u);
}

TEST(Functionality, MalformedMessagesThrow) {
  ComMpufFunctionality f({}, 2);
  EXPECT_EQ(code_of([&] { f.handle(Party::kP2, honest_init(1, Party::kP1)); }), "MALFORMED");
  auto bad = honest_init(1, Party::kP1);
  bad.program = puf::identity_program();
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, bad); }), "MALFORMED");
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, malicious_init(1, Party::kP1, nullptr)); }), "MALFORMED");
  bad = honest_init(1, Party::kP1);
  bad.family.d_min = 0;
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, bad); }), "MALFORMED");
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, EvalMsg{1, Party::kP2, BitString(8)}); }), "MALFORMED");
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, HandoverMsg{1, Party::kP1, Party::kP1}); }), "MALFORMED");
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, HandoverMsg{1, Party::kP1, Party::kAdversary}); }), "MALFORMED");
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, ReadyMsg{1}); }), "MALFORMED");
  EXPECT_EQ(code_of([&] { f.handle(Party::kAdversary, InMsg{1, Party::kAdversary, BitString(1)}); }), "MALFORMED");
  EXPECT_EQ(f.tokens(), 0u);

  f.handle(Party::kP1, honest_init(1, Party::kP1));
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, EvalMsg{1, Party::kP1, BitString(9)}); }), "LEN_MISMATCH");
}

TEST(Functionality, StateBudgetRejectsProgram) {
  ComMpufFunctionality f({0, std::nullopt, 0}, 3);
  EXPECT_EQ(code_of([&] { f.handle(Party::kP1, malicious_init(1, Party::kP1, puf::query_logger_program(8))); }),
            "STATE_BUDGET");
  EXPECT_EQ(f.tokens(), 0u);
  ASSERT_FALSE(f.log().empty());
  EXPECT_NE(f.log().back().note.find("STATE_BUDGET"), std::string::npos);
}

TEST(Functionality, OutgoingBudget) {
  for (std::optional<std::size_t> k_out : {std::optional<std::size_t>(0), std::optional<std::size_t>(8),
                                           std::optional<std::size_t>(20), std::optional<std::size_t>()}) {
    ComMpufFunctionality f({0, std::nullopt, k_out}, 4);
    f.handle(Party::kP1, malicious_init(1, Party::kP1, puf::leaking_program()));
    pass(f, 1, Party::kP1, Party::kP2);
    std::size_t delivered = 0;
    for (int i = 0; i < 4; ++i) {
      auto d = f.handle(Party::kP2, EvalMsg{1, Party::kP2, BitString::from_uint(i, 8)});
      ASSERT_EQ(d[0].kind, Kind::kResponse);
      EXPECT_EQ(d[0].to, Party::kP2);
      for (const auto& x : d)
        if (x.kind == Kind::kOutMsg) {
          EXPECT_EQ(x.to, Party::kP1);
          delivered += x.payload.size();
        }
    }
    const std::size_t want = k_out ? (*k_out / 8) * 8 : 32;
    EXPECT_EQ(delivered, std::min<std::size_t>(want, 32));
  }
}

TEST(Functionality, IncomingBudgetAndCreatorOnly) {
  ComMpufFunctionality f({16, 8, std::nullopt}, 5);
  f.handle(Party::kP1, malicious_init(1, Party::kP1, puf::query_logger_program(8)));
  f.handle(Party::kP2, honest_init(2, Party::kP2));
  pass(f, 1, Party::kP1, Party::kP2);
  f.handle(Party::kP2, EvalMsg{1, Party::kP2, BitString::from_bits("11110000")});
  // the logger reports its state on any incoming message
  auto d = f.handle(Party::kP1, InMsg{1, Party::kP1, BitString(4)});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].payload.to_bits(), "11110000");
  EXPECT_EQ(f.handle(Party::kP1, InMsg{1, Party::kP1, BitString(4)}).size(), 1u);
  EXPECT_TRUE(f.handle(Party::kP1, InMsg{1, Party::kP1, BitString(1)}).empty());  // k_in spent
  EXPECT_TRUE(f.handle(Party::kP2, InMsg{1, Party::kP2, BitString(1)}).empty());  // not the creator
  EXPECT_TRUE(f.handle(Party::kP2, InMsg{2, Party::kP2, BitString(1)}).empty());  // honest token
}

TEST(Functionality, NoChannelVariantAgreesWhenSilent) {
  // the same honest and silent-malicious run on both functionalities gives the same answers
  auto run = [](PufFunctionality& f) {
    std::vector<std::string> out;
    f.handle(Party::kP1, honest_init(1, Party::kP1));
    f.handle(Party::kP2, malicious_init(2, Party::kP2, puf::identity_program()));
    pass(f, 1, Party::kP1, Party::kP2);
    pass(f, 2, Party::kP2, Party::kP1);
    for (int i = 0; i < 20; ++i) {
      for (const auto& d : f.handle(Party::kP2, EvalMsg{1, Party::kP2, BitString::from_uint(i, 8)}))
        out.push_back(d.describe());
      for (const auto& d : f.handle(Party::kP1, EvalMsg{2, Party::kP1, BitString::from_uint(i, 8)}))
        out.push_back(d.describe());
    }
    return out;
  };
  ComMpufFunctionality a({0, std::nullopt, 0}, 6);
  MpufFunctionality b(0, 6);
  EXPECT_EQ(run(a), run(b));

  // and the no-channel variant refuses messages outright
  MpufFunctionality c(std::nullopt, 6);
  c.handle(Party::kP1, malicious_init(1, Party::kP1, puf::leaking_program()));
  pass(c, 1, Party::kP1, Party::kP2);
  auto d = c.handle(Party::kP2, EvalMsg{1, Party::kP2, BitString(8)});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, Kind::kResponse);
  EXPECT_TRUE(c.handle(Party::kP1, InMsg{1, Party::kP1, BitString(3)}).empty());
  EXPECT_FALSE(c.supports_inmsg());
}

TEST(Functionality, LogIsDeterministic) {
  auto text = [](std::uint64_t seed) {
    ComMpufFunctionality f({}, seed);
    f.handle(Party::kP1, honest_init(1, Party::kP1));
    for (int i = 0; i < 5; ++i) f.handle(Party::kP1, EvalMsg{1, Party::kP1, BitString::from_uint(i, 8)});
    return f.log_text();
  };
  EXPECT_EQ(text(9), text(9));
  EXPECT_NE(text(9), text(10));
}

TEST(CommitFunctionality, CommitThenOpenOnce) {
  CommitFunctionality c;
  EXPECT_TRUE(c.open(Party::kP1).empty());
  auto n = c.commit(Party::kP1, BitString::from_bits("1"));
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].to, Party::kP2);
  EXPECT_EQ(n[0].kind, "receipt");
  EXPECT_FALSE(n[0].value.has_value());
  EXPECT_TRUE(c.commit(Party::kP1, BitString::from_bits("0")).empty());
  EXPECT_TRUE(c.open(Party::kP2).empty());
  n = c.open(Party::kP1);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].kind, "open");
  EXPECT_EQ(n[0].value->to_bits(), "1");
  EXPECT_TRUE(c.halted());
  EXPECT_TRUE(c.open(Party::kP1).empty());
}
