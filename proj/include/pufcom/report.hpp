#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pufcom {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ResourceCounters {
  std::uint64_t pufs_created = 0;
  std::uint64_t exchange_phases = 0;
  std::uint64_t puf_queries = 0;
  std::uint64_t messages = 0;
  std::uint64_t message_bits = 0;

  ResourceCounters& operator+=(const ResourceCounters& o);
};

// Wilson score interval for k successes out of n at 95% confidence.
std::pair<double, double> wilson95(std::uint64_t k, std::uint64_t n);

struct ExperimentReport {
  std::string name;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;
  std::map<std::string, std::uint64_t> aborts;  // keyed by the step that aborted
  ResourceCounters resources;
  std::map<std::string, double> metrics;
  std::vector<Check> checks;
  std::string digest;  // digest over all per-trial event logs
  double wall_seconds = 0;  // console only, never serialised

  std::uint64_t abort_total() const;
  bool consistent() const { return successes + failures + abort_total() == trials; }
  bool passed() const;
  void check(std::string name, bool ok, std::string detail = {});

  std::string to_json() const;
  std::string summary_table() const;
};

}  // namespace pufcom
