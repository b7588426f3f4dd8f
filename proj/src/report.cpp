#include "pufcom/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace pufcom {

ResourceCounters& ResourceCounters::operator+=(const ResourceCounters& o) {
  pufs_created += o.pufs_created;
  exchange_phases += o.exchange_phases;
  puf_queries += o.puf_queries;
  messages += o.messages;
  message_bits += o.message_bits;
  return *this;
}

std::pair<double, double> wilson95(std::uint64_t k, std::uint64_t n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double denom = 1 + z * z / nn;
  const double center = (p + z * z / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::uint64_t ExperimentReport::abort_total() const {
  std::uint64_t t = 0;
  for (const auto& [step, c] : aborts) t += c;
  return t;
}

bool ExperimentReport::passed() const {
  if (!consistent()) return false;
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

void ExperimentReport::check(std::string n, bool ok, std::string detail) {
  checks.push_back({std::move(n), ok, std::move(detail)});
}

std::string ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["seed"] = seed;
  j["trials"] = trials;
  j["successes"] = successes;
  j["failures"] = failures;
  j["aborts"] = aborts;
  const auto [lo, hi] = wilson95(successes, trials);
  j["success_rate"] = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  j["wilson95"] = {lo, hi};
  j["resources"] = {{"pufs_created", resources.pufs_created},
                    {"exchange_phases", resources.exchange_phases},
                    {"puf_queries", resources.puf_queries},
                    {"messages", resources.messages},
                    {"message_bits", resources.message_bits}};
  j["metrics"] = metrics;
  auto& cj = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) cj.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["digest"] = digest;
  j["passed"] = passed();
  return j.dump(2) + "\n";
}

std::string ExperimentReport::summary_table() const {
  std::ostringstream os;
  char buf[160];
  const auto [lo, hi] = wilson95(successes, trials);
  os << "experiment  " << name << "\n";
  std::snprintf(buf, sizeof buf, "trials %llu  successes %llu  failures %llu  aborts %llu\n",
                static_cast<unsigned long long>(trials), static_cast<unsigned long long>(successes),
                static_cast<unsigned long long>(failures), static_cast<unsigned long long>(abort_total()));
  os << buf;
  std::snprintf(buf, sizeof buf, "success rate %.4f  wilson95 [%.4f, %.4f]\n",
                trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0, lo, hi);
  os << buf;
  for (const auto& [step, c] : aborts) os << "  abort@" << step << "  " << c << "\n";
  std::snprintf(buf, sizeof buf, "pufs %llu  exchange phases %llu  queries %llu\n",
                static_cast<unsigned long long>(resources.pufs_created),
                static_cast<unsigned long long>(resources.exchange_phases),
                static_cast<unsigned long long>(resources.puf_queries));
  os << buf;
  for (const auto& [k, v] : metrics) {
    std::snprintf(buf, sizeof buf, "  %-32s %.6g\n", k.c_str(), v);
    os << buf;
  }
  for (const auto& c : checks) os << (c.passed ? "  [ok]   " : "  [FAIL] ") << c.name << "  " << c.detail << "\n";
  return os.str();
}

}  // namespace pufcom
