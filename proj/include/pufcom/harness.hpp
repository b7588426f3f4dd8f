#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pufcom/report.hpp"

namespace pufcom::harness {

inline constexpr int kConfigVersion = 1;

// One experiment. Budgets left empty are unbounded.
struct ExperimentConfig {
  std::string name;
  std::string property;  // completeness, attack, neutralization, extraction, binding, hiding, cost,
                         // lemmas, ecc-fe, tq, uc-sim-receiver, uc-sim-sender, determinism, budget,
                         // cq, indist, crp, tq-direct
  std::string protocol = "extpuf";
  std::string adversary = "honest";  // zoo id, or "zoo" for every applicable member
  std::size_t n = 16;
  std::size_t k = 1;
  std::size_t count = 1;
  std::size_t pairs = 8;
  std::size_t d_noise = 5;
  std::size_t ext_d_min = 2;
  std::size_t queries = 16;     // cq / crp / indist
  std::size_t samples = 0;      // secondary sample count, 0 = property default
  std::size_t max_support = 8;  // lemmas
  bool literal_second_check = false;
  std::optional<std::size_t> k_state = 0;
  std::optional<std::size_t> k_in;
  std::optional<std::size_t> k_out = 0;
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::string report_path;
  std::string log_dir;  // per-trial event logs, written when set
};

// Throws Error("CONFIG", "<field path>: <problem>") on the first invalid field.
void validate(const ExperimentConfig& cfg, const std::string& where = "");

// A config file holds a list of runs sharing a set of defaults.
struct Suite {
  int version = kConfigVersion;
  std::string name;
  std::vector<ExperimentConfig> runs;
};
Suite parse_suite(const std::string& yaml_text);
Suite load_suite(const std::string& path);

ExperimentReport run_experiment(const ExperimentConfig& cfg);
void write_report(const ExperimentReport& r, const std::string& path);

// PUFs created and exchange phases of one honest run.
ResourceCounters cost_report(const std::string& protocol, std::size_t n, std::size_t pairs = 0,
                             std::uint64_t seed = 1);
// Counts the protocol is expected to need.
std::pair<std::uint64_t, std::uint64_t> expected_cost(const std::string& protocol, std::size_t pairs);

// One honest-or-adversarial run of a protocol, for demos and tests.
struct DemoRun {
  std::string trace;
  std::string event_log;
  std::string outcome;
  bool ok = false;
};
DemoRun demo(const std::string& protocol, const std::string& adversary, std::size_t n, std::uint64_t seed);

// Standalone property experiments on the token model and the extractor.
ExperimentReport cq_experiment(const ExperimentConfig& cfg);
ExperimentReport indist_experiment(const ExperimentConfig& cfg);
ExperimentReport crp_experiment(const ExperimentConfig& cfg);
ExperimentReport tq_direct_experiment(const ExperimentConfig& cfg);
ExperimentReport ecc_fe_experiment(const ExperimentConfig& cfg);

}  // namespace pufcom::harness
