#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pufcom/adversaries.hpp"
#include "pufcom/error.hpp"
#include "pufcom/harness.hpp"

using namespace pufcom;
using harness::ExperimentConfig;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::uint64_t trials = 0;
  std::size_t n = 0;
  std::string out;
  unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--trials", c.trials, "number of trials");
  app->add_option("--n", c.n, "security parameter");
  app->add_option("--out", c.out, "directory for reports and logs");
  app->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

int finish(const std::vector<ExperimentReport>& reports, const std::string& out) {
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << r.summary_table();
    std::printf("wall %.2fs\n\n", r.wall_seconds);
    if (!out.empty()) harness::write_report(r, (std::filesystem::path(out) / (r.name + ".json")).string());
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

ExperimentConfig base(const Common& c, std::string property, std::uint64_t trials, std::size_t n) {
  ExperimentConfig cfg;
  cfg.property = std::move(property);
  cfg.name = cfg.property;
  cfg.seed = c.seed;
  cfg.trials = c.trials ? c.trials : trials;
  cfg.n = c.n ? c.n : n;
  cfg.threads = c.threads;
  return cfg;
}

std::string safe_name(std::string s) {
  for (auto& ch : s)
    if (ch == '/' || ch == ' ') ch = '_';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PUF commitment protocols: runs, attacks and statistical experiments"};
  app.require_subcommand(1);

  Common c;
  std::string protocol, adversary = "honest", config_path, which, target;

  auto* demo = app.add_subcommand("demo", "run one protocol session and print its trace");
  demo->add_option("protocol", protocol, "cpuf | extpuf | extpuf-original | collextpuf | uccompiler | uccompiler-compat")
      ->required();
  demo->add_option("--adversary", adversary, "zoo member to play one side");
  add_common(demo, c);

  auto* attack = app.add_subcommand("attack", "replay the double-query attack");
  attack->add_option("target", target, "original-extpuf")->required()->check(CLI::IsMember({"original-extpuf"}));
  add_common(attack, c);

  auto* experiment = app.add_subcommand("experiment", "run every experiment in a config file");
  experiment->add_option("config", config_path, "YAML config")->required();
  add_common(experiment, c);

  auto* ucsim = app.add_subcommand("uc-sim", "compare real and simulated compiler runs");
  ucsim->add_option("corrupted", which, "receiver | sender")->required()->check(CLI::IsMember({"receiver", "sender"}));
  std::size_t pairs = 8;
  ucsim->add_option("--pairs", pairs, "blob pairs (length of e)");
  add_common(ucsim, c);

  auto* costs = app.add_subcommand("costs", "count PUFs and exchange phases of one honest run");
  costs->add_option("protocol", protocol, "protocol id")->required();
  add_common(costs, c);

  auto* lemmas = app.add_subcommand("lemmas", "check the entropy lemmas on random small distributions");
  add_common(lemmas, c);

  auto* props = app.add_subcommand("props", "token and extractor property experiments");
  props->add_option("property", which, "cq | indist | crp | tq")->required()->check(CLI::IsMember({"cq", "indist", "crp", "tq"}));
  add_common(props, c);

  auto* zoo = app.add_subcommand("zoo", "list adversary ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*zoo) {
      for (const auto& m : adv::zoo()) {
        std::cout << m.id << "  [" << (m.role == adv::Role::kSender ? "sender" : "receiver") << ", " << m.game << "]  ";
        for (const auto& p : m.protocols) std::cout << p << " ";
        std::cout << "\n    " << m.description << "\n";
      }
      return 0;
    }
    if (*demo) {
      const auto d = harness::demo(protocol, adversary, c.n ? c.n : 16, c.seed);
      std::cout << d.trace << "\n" << d.outcome << "\n";
      if (!c.out.empty()) {
        std::filesystem::create_directories(c.out);
        std::ofstream(std::filesystem::path(c.out) / "events.jsonl") << d.event_log;
        std::ofstream(std::filesystem::path(c.out) / "trace.jsonl") << d.trace;
      }
      return d.ok ? 0 : 1;
    }
    if (*attack) {
      auto cfg = base(c, "attack", 500, 16);
      cfg.name = "attack-original-extpuf";
      cfg.protocol = "extpuf-original";
      cfg.adversary = "double-query-sender";
      cfg.d_noise = 3;
      return finish({harness::run_experiment(cfg)}, c.out);
    }
    if (*experiment) {
      auto suite = harness::load_suite(config_path);
      std::vector<ExperimentReport> reports;
      for (auto cfg : suite.runs) {
        if (c.trials) cfg.trials = c.trials;
        if (c.n) cfg.n = c.n;
        if (c.threads) cfg.threads = c.threads;
        if (app.get_subcommand("experiment")->count("--seed")) cfg.seed = c.seed;
        cfg.name = safe_name(cfg.name);
        reports.push_back(harness::run_experiment(cfg));
      }
      return finish(reports, c.out);
    }
    if (*ucsim) {
      auto cfg = base(c, which == "receiver" ? "uc-sim-receiver" : "uc-sim-sender", 10000, 32);
      cfg.protocol = "uccompiler";
      cfg.pairs = pairs;
      return finish({harness::run_experiment(cfg)}, c.out);
    }
    if (*costs) {
      const std::size_t n = c.n ? c.n : 16;
      const auto res = harness::cost_report(protocol, n, n, c.seed);
      const auto [pufs, phases] = harness::expected_cost(protocol, n);
      std::cout << protocol << " n=" << n << "  pufs " << res.pufs_created << " (expected " << pufs
                << ")  exchange phases " << res.exchange_phases << " (expected " << phases << ")  queries "
                << res.puf_queries << "  messages " << res.messages << "  message bits " << res.message_bits << "\n";
      return res.pufs_created == pufs && res.exchange_phases == phases ? 0 : 1;
    }
    if (*lemmas) {
      auto cfg = base(c, "lemmas", 10000, 16);
      return finish({harness::run_experiment(cfg)}, c.out);
    }
    if (*props) {
      const std::string prop = which == "tq" ? "tq-direct" : which;
      auto cfg = base(c, prop, 10000, 16);
      if (which == "tq") cfg.trials = c.trials ? c.trials : 1000;
      return finish({harness::run_experiment(cfg)}, c.out);
    }
  } catch (const Error& e) {
    std::cerr << "error " << e.code() << ": " << e.what() << "\n";
    return std::string(e.code()) == "CONFIG" ? 2 : 1;
  }
  return 0;
}
