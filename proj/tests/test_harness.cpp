#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "pufcom/adversaries.hpp"
#include "pufcom/error.hpp"
#include "pufcom/harness.hpp"

using namespace pufcom;
using namespace pufcom::harness;

namespace {

std::string config_error(const std::string& yaml) {
  try {
    parse_suite(yaml);
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.code()), "CONFIG");
    return e.what();
  }
  return "";
}

ExperimentConfig small(std::string property, std::string protocol, std::uint64_t trials = 20) {
  ExperimentConfig c;
  c.property = std::move(property);
  c.name = c.property;
  c.protocol = std::move(protocol);
  c.trials = trials;
  c.pairs = 2;
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(PUFCOM_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, NestedSuiteWithDefaults) {
  const auto s = parse_suite(R"(
version: 1
suite: smoke
defaults:
  protocol: collextpuf
  params: {n: 20, count: 3}
  budgets: {k_state: unbounded, k_out: 4}
  run: {trials: 7, seed: 11}
runs:
  - property: completeness
  - name: hide
    property: hiding
    adversary: ones-distinguisher
    params: {k: 2}
    run: {seed: 12}
)");
  EXPECT_EQ(s.name, "smoke");
  ASSERT_EQ(s.runs.size(), 2u);
  EXPECT_EQ(s.runs[0].name, "smoke/0");
  EXPECT_EQ(s.runs[0].n, 20u);
  EXPECT_EQ(s.runs[0].count, 3u);
  EXPECT_FALSE(s.runs[0].k_state.has_value());
  EXPECT_EQ(s.runs[0].k_out, std::optional<std::size_t>(4));
  EXPECT_FALSE(s.runs[0].k_in.has_value());
  EXPECT_EQ(s.runs[0].seed, 11u);
  EXPECT_EQ(s.runs[1].name, "hide");
  EXPECT_EQ(s.runs[1].k, 2u);
  EXPECT_EQ(s.runs[1].n, 20u);
  EXPECT_EQ(s.runs[1].seed, 12u);
  EXPECT_EQ(s.runs[1].trials, 7u);
}

TEST(Config, FlatSingleRun) {
  const auto s = parse_suite("version: 1\nproperty: lemmas\nrun: {trials: 5}\n");
  ASSERT_EQ(s.runs.size(), 1u);
  EXPECT_EQ(s.runs[0].property, "lemmas");
  EXPECT_EQ(s.runs[0].trials, 5u);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(config_error("property: lemmas\n").find("version"), std::string::npos);
  EXPECT_NE(config_error("version: 2\nproperty: lemmas\n").find("version"), std::string::npos);
  EXPECT_NE(config_error("version: 1\nproperty: lemmas\nbogus: 1\n").find("bogus"), std::string::npos);
  EXPECT_NE(config_error("version: 1\nruns:\n  - property: cost\n  - property: cost\n    params: {n: 2}\n")
                .find("runs[1].params.n"),
            std::string::npos);
  EXPECT_NE(config_error("version: 1\nruns:\n  - property: cost\n    params: {nn: 2}\n").find("runs[0].params.nn"),
            std::string::npos);
  EXPECT_NE(config_error("version: 1\nproperty: cost\nparams: {n: abc}\n").find("params.n"), std::string::npos);
  EXPECT_NE(config_error("version: 1\nproperty: cost\nparams: {d_noise: 4}\n").find("params.d_noise"),
            std::string::npos);
  EXPECT_NE(config_error("version: 1\nproperty: nope\n").find("property"), std::string::npos);
  EXPECT_NE(config_error("version: 1\nproperty: cost\nadversary: nobody\n").find("adversary"), std::string::npos);
  EXPECT_NE(config_error("version: 1\nproperty: cost\nrun: {trials: 0}\n").find("run.trials"), std::string::npos);
  EXPECT_NE(config_error("version: 1\nruns: []\n").find("runs"), std::string::npos);
  EXPECT_NE(config_error("version: 1\nproperty: [1\n").find("yaml"), std::string::npos);
  EXPECT_THROW(load_suite("/nonexistent/suite.yaml"), Error);
}

TEST(Config, CrossFieldRules) {
  auto c = small("attack", "extpuf");
  EXPECT_THROW(validate(c), Error);
  c.protocol = "extpuf-original";
  EXPECT_NO_THROW(validate(c));
  c = small("completeness", "extpuf");
  c.count = 2;
  EXPECT_THROW(validate(c), Error);
  c = small("completeness", "extpuf-original");
  c.k = 2;
  EXPECT_THROW(validate(c), Error);
  c = small("uc-sim-sender", "uccompiler-compat");
  EXPECT_THROW(validate(c), Error);
  c = small("lemmas", "whatever");
  EXPECT_NO_THROW(validate(c));
}

TEST(Cost, MatchesExpectedCounts) {
  for (const std::string p : {"cpuf", "extpuf", "collextpuf", "extpuf-original", "uccompiler", "blobeq"}) {
    const auto res = cost_report(p, 16, 2);
    const auto [pufs, phases] = expected_cost(p, 2);
    EXPECT_EQ(res.pufs_created, pufs) << p;
    EXPECT_EQ(res.exchange_phases, phases) << p;
  }
  EXPECT_EQ(expected_cost("uccompiler", 8), (std::pair<std::uint64_t, std::uint64_t>{4, 4}));
  EXPECT_EQ(expected_cost("extpuf", 8), (std::pair<std::uint64_t, std::uint64_t>{2, 2}));
  EXPECT_EQ(expected_cost("cpuf", 8), (std::pair<std::uint64_t, std::uint64_t>{1, 1}));
  for (std::size_t pairs : {1u, 3u}) {
    const auto res = cost_report("uccompiler-compat", 16, pairs);
    EXPECT_EQ(res.pufs_created, 8 * pairs + 2);
    EXPECT_EQ(res.exchange_phases, 8 * pairs + 2);
  }
}

TEST(Runs, SameSeedSameDigest) {
  auto c = small("completeness", "collextpuf", 12);
  c.count = 2;
  const auto a = run_experiment(c);
  c.threads = 1;
  const auto b = run_experiment(c);
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(a.to_json().size(), b.to_json().size());
  c.seed = 2;
  EXPECT_NE(run_experiment(c).digest, a.digest);
  EXPECT_TRUE(a.passed()) << a.summary_table();
  EXPECT_TRUE(a.consistent());
}

TEST(Runs, SmallSuitesPass) {
  std::vector<ExperimentConfig> cs{small("completeness", "cpuf"), small("completeness", "uccompiler", 10),
                                   small("attack", "extpuf-original"), small("neutralization", "extpuf"),
                                   small("tq", "extpuf"),             small("budget", "extpuf"),
                                   small("determinism", "extpuf", 5), small("cost", "uccompiler", 1)};
  cs[0].k = 2;
  cs[2].d_noise = 3;
  cs[2].adversary = "double-query-sender";
  cs[5].adversary = "leaking-token-sender";
  for (const auto& c : cs) {
    const auto r = run_experiment(c);
    EXPECT_TRUE(r.passed()) << c.property << " " << c.protocol << "\n" << r.summary_table();
  }
}

TEST(Runs, TokenPropertiesPass) {
  for (const std::string p : {"cq", "crp", "tq-direct"}) {
    const auto r = run_experiment(small(p, "extpuf", 200));
    EXPECT_TRUE(r.passed()) << r.summary_table();
  }
  auto e = small("ecc-fe", "extpuf", 50);
  e.samples = 2000;
  const auto r = run_experiment(e);
  EXPECT_EQ(r.metrics.at("ecc.failures"), 0);
  EXPECT_EQ(r.metrics.at("fe.roundtrip_failures"), 0);
  EXPECT_EQ(r.metrics.at("fe.consistency_failures"), 0);
}

TEST(Zoo, EveryMemberRunsAgainstItsProtocols) {
  EXPECT_GE(adv::zoo().size(), 8u);
  EXPECT_EQ(adv::member("honest").id, "honest-sender");
  EXPECT_THROW(adv::member("nobody"), Error);
  for (const auto& m : adv::zoo()) {
    for (const auto& p : m.protocols) {
      ASSERT_TRUE(adv::applies(m, p));
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        try {
          const auto d = demo(p, m.id, 16, seed);
          EXPECT_FALSE(d.event_log.empty()) << m.id << " " << p;
        } catch (const Error& e) {
          ADD_FAILURE() << m.id << " vs " << p << ": " << e.code() << " " << e.what();
        }
      }
    }
  }
}

TEST(Zoo, AttackOnlyAgainstTheOriginal) {
  const auto d = demo("extpuf-original", "double-query-sender", 16, 3);
  EXPECT_NE(d.outcome.find("none"), std::string::npos) << d.outcome;
  // the same strategy has no meaning once r arrives after the second token is back
  try {
    demo("extpuf", "double-query-sender", 16, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.code()), "UNCONSTRUCTIBLE");
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "pufcom_cli_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "ok.yaml") << "version: 1\nproperty: cost\nprotocol: extpuf\nrun: {trials: 1}\n";
  std::ofstream(dir / "bad.yaml") << "version: 1\nproperty: cost\nparams: {n: 1}\n";
  EXPECT_EQ(cli("experiment " + (dir / "ok.yaml").string()), 0);
  EXPECT_EQ(cli("experiment " + (dir / "bad.yaml").string()), 2);
  EXPECT_EQ(cli("experiment " + (dir / "missing.yaml").string()), 2);
  EXPECT_EQ(cli("--no-such-flag"), 2);
  EXPECT_EQ(cli("props nope"), 2);
  EXPECT_EQ(cli("costs uccompiler --n 16"), 0);
  EXPECT_EQ(cli("demo extpuf --seed 4"), 0);
  EXPECT_EQ(cli("demo extpuf --adversary aborting-token-receiver"), 1);
  EXPECT_EQ(cli("zoo"), 0);
}
