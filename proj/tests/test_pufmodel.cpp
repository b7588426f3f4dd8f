#include <gtest/gtest.h>

#include "pufcom/error.hpp"
#include "pufcom/pufmodel.hpp"

using namespace pufcom;
using namespace pufcom::puf;

namespace {

PufParams params(std::size_t n, std::size_t rg, std::size_t d_noise) {
  PufParams p;
  p.n = n;
  p.rg = rg;
  p.d_noise = d_noise;
  p.d_min = default_d_min(n);
  p.m = rg / 2 ? rg / 2 : 1;
  return p;
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(PufParams, Validation) {
  EXPECT_NO_THROW(params(16, 16, 5).validate());
  auto p = params(16, 16, 5);
  p.n = 0;
  EXPECT_EQ(code_of([&] { p.validate(); }), "CONFIG");
  p = params(16, 16, 5);
  p.d_noise = 17;
  EXPECT_EQ(code_of([&] { p.validate(); }), "CONFIG");
  p = params(16, 16, 5);
  p.d_min = 18;
  EXPECT_EQ(code_of([&] { p.validate(); }), "CONFIG");
  p = params(16, 16, 5);
  p.m = 0;
  EXPECT_EQ(code_of([&] { p.validate(); }), "CONFIG");
  EXPECT_EQ(default_d_min(8), 2u);
  EXPECT_EQ(default_d_min(32), 4u);
}

TEST(PufInstance, NoiseStaysBelowThreshold) {
  Rng rng(3);
  for (std::size_t d : {1u, 3u, 5u, 9u}) {
    const auto puf = sample_puf(params(32, 40, d), rng);
    const BitString s = BitString::random(rng, 32);
    std::vector<BitString> reads;
    for (int i = 0; i < 300; ++i) reads.push_back(puf.eval(s, rng));
    for (const auto& r : reads) ASSERT_LE(hamming_distance(r, puf.ideal(s)), puf.max_flips());
    for (std::size_t i = 0; i < reads.size(); ++i)
      for (std::size_t j = i + 1; j < reads.size(); ++j) ASSERT_LT(hamming_distance(reads[i], reads[j]), d);
  }
}

TEST(PufInstance, StatelessAndKeyed) {
  Rng rng(4);
  const auto p = params(16, 24, 5);
  const auto a = sample_puf(p, rng);
  const auto b = sample_puf(p, rng);
  const BitString s = BitString::random(rng, 16);
  const BitString before = a.ideal(s);
  for (int i = 0; i < 50; ++i) (void)a.eval(BitString::random(rng, 16), rng);
  EXPECT_EQ(a.ideal(s), before);
  EXPECT_NE(a.ideal(s), b.ideal(s));
  std::array<std::uint8_t, 32> key{};
  key[0] = 7;
  EXPECT_EQ(PufInstance(p, key).ideal(s), PufInstance(p, key).ideal(s));
  EXPECT_EQ(code_of([&] { (void)a.ideal(BitString(15)); }), "LEN_MISMATCH");
}

TEST(Unpredictability, PreconditionAndVacuousCase) {
  Rng rng(5);
  auto p = params(8, 8, 1);
  const BitString target = BitString::random(rng, 8);
  BitString near = target;
  near.flip(0);
  EXPECT_EQ(code_of([&] { estimate_unpredictability(p, {near}, target, 10, rng); }), "PRECONDITION_UNMET");
  p.d_min = 9;
  EXPECT_TRUE(estimate_unpredictability(p, {near}, target, 10, rng).vacuous);
  p = params(8, 20, 1);
  EXPECT_EQ(code_of([&] { estimate_unpredictability(p, {}, target, 10, rng); }), "CONFIG");
}

TEST(Unpredictability, FreshResponsesLookUniform) {
  Rng rng(6);
  const auto p = params(8, 8, 1);
  const BitString target = BitString::random(rng, 8);
  const auto est = estimate_unpredictability(p, {}, target, 20000, rng);
  EXPECT_FALSE(est.vacuous);
  EXPECT_EQ(est.samples, 20000u);
  EXPECT_GT(est.bits, 7.0);
  EXPECT_LE(est.bits, 8.0);
}

TEST(Machine, StockPrograms) {
  Rng rng(8);
  const auto p = params(16, 16, 1);
  const auto inner = sample_puf(p, rng);
  const BitString s = BitString::random(rng, 16);

  MaliciousPufMachine id(identity_program(), 0);
  EXPECT_EQ(code_of([&] { id.step(InputKind::kQuery, s, rng); }), "MALFORMED");
  id.attach_inner(inner);
  EXPECT_EQ(*id.step(InputKind::kQuery, s, rng).response, inner.ideal(s));

  const BitString v = BitString::from_bits("1010");
  MaliciousPufMachine k(constant_program(v), 0);
  EXPECT_EQ(*k.step(InputKind::kQuery, s, rng).response, v);
  EXPECT_EQ(*k.step(InputKind::kQuery, ~s, rng).response, v);

  MaliciousPufMachine ab(aborting_program(), 0);
  EXPECT_FALSE(ab.step(InputKind::kQuery, s, rng).response.has_value());

  MaliciousPufMachine leak(leaking_program(), 0);
  leak.attach_inner(inner);
  const auto out = leak.step(InputKind::kQuery, s, rng);
  EXPECT_EQ(*out.outgoing, s);
  EXPECT_EQ(*out.response, inner.ideal(s));
}

TEST(Machine, StateBudget) {
  EXPECT_EQ(code_of([] { MaliciousPufMachine(query_logger_program(16), 0); }), "STATE_BUDGET");
  EXPECT_EQ(code_of([] { MaliciousPufMachine(query_logger_program(16), 15); }), "STATE_BUDGET");
  EXPECT_EQ(code_of([] { MaliciousPufMachine(nullptr, 0); }), "MALFORMED");

  Rng rng(9);
  const auto inner = sample_puf(params(16, 16, 1), rng);
  MaliciousPufMachine logger(query_logger_program(16), 16);
  logger.attach_inner(inner);
  const BitString s = BitString::random(rng, 16);
  (void)logger.step(InputKind::kQuery, s, rng);
  EXPECT_EQ(logger.state(), s);
  EXPECT_EQ(*logger.step(InputKind::kMsg, BitString(), rng).outgoing, s);

  // a program that lies about its needs is stopped when it grows
  auto liar = make_program("liar", 2, [](InputKind, const BitString& x, BitString& st, const InnerOracle&) {
    st = x;
    return MachineOutput{};
  });
  MaliciousPufMachine m(liar, 2);
  EXPECT_NO_THROW(m.step(InputKind::kMsg, BitString(2), rng));
  EXPECT_EQ(code_of([&] { m.step(InputKind::kMsg, BitString(3), rng); }), "STATE_BUDGET");
  EXPECT_EQ(m.state().size(), 2u);

  // unbounded budget accepts anything
  MaliciousPufMachine free(make_program("big", std::nullopt, [](InputKind, const BitString&, BitString& st,
                                                                 const InnerOracle&) {
                             st = BitString(1000);
                             return MachineOutput{};
                           }),
                           std::nullopt);
  EXPECT_NO_THROW(free.step(InputKind::kMsg, BitString(), rng));
  EXPECT_EQ(code_of([] {
              MaliciousPufMachine(make_program("big", std::nullopt, [](auto, auto&, auto&, auto&) { return MachineOutput{}; }),
                                  64);
            }),
            "STATE_BUDGET");
}
