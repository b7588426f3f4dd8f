#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pufcom/adversaries.hpp"
#include "pufcom/error.hpp"
#include "pufcom/harness.hpp"

namespace pufcom::harness {

namespace {

const std::set<std::string> kProperties = {
    "completeness", "attack", "neutralization", "extraction", "binding",    "hiding",
    "cost",         "lemmas", "ecc-fe",         "tq",         "uc-sim-receiver", "uc-sim-sender",
    "determinism",  "budget", "cq",             "indist",     "crp",        "tq-direct"};

const std::set<std::string> kProtocols = {"cpuf",       "extpuf",            "extpuf-original", "collextpuf",
                                          "uccompiler", "uccompiler-compat", "blobeq"};

[[noreturn]] void bad(const std::string& path, const std::string& what) { throw Error("CONFIG", path + ": " + what); }

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

template <class T>
T scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) bad(path, "expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    bad(path, "cannot read '" + n.Scalar() + "'");
  }
}

std::size_t count_of(const YAML::Node& n, const std::string& path) {
  const auto v = scalar<long long>(n, path);
  if (v < 0) bad(path, "must be non-negative");
  return static_cast<std::size_t>(v);
}

std::optional<std::size_t> budget_of(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar() && (n.Scalar() == "unbounded" || n.Scalar() == "~")) return std::nullopt;
  if (n.IsNull()) return std::nullopt;
  return count_of(n, path);
}

void expect_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) bad(path, "expected a mapping");
}

void apply_params(const YAML::Node& node, ExperimentConfig& c, const std::string& path) {
  expect_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto p = join(path, key);
    const auto& v = kv.second;
    if (key == "n") c.n = count_of(v, p);
    else if (key == "k") c.k = count_of(v, p);
    else if (key == "count") c.count = count_of(v, p);
    else if (key == "pairs") c.pairs = count_of(v, p);
    else if (key == "d_noise") c.d_noise = count_of(v, p);
    else if (key == "ext_d_min") c.ext_d_min = count_of(v, p);
    else if (key == "queries") c.queries = count_of(v, p);
    else if (key == "samples") c.samples = count_of(v, p);
    else if (key == "max_support") c.max_support = count_of(v, p);
    else if (key == "literal_second_check") c.literal_second_check = scalar<bool>(v, p);
    else bad(p, "unknown field");
  }
}

void apply_budgets(const YAML::Node& node, ExperimentConfig& c, const std::string& path) {
  expect_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto p = join(path, key);
    if (key == "k_state") c.k_state = budget_of(kv.second, p);
    else if (key == "k_in") c.k_in = budget_of(kv.second, p);
    else if (key == "k_out") c.k_out = budget_of(kv.second, p);
    else bad(p, "unknown field");
  }
}

void apply_run(const YAML::Node& node, ExperimentConfig& c, const std::string& path) {
  expect_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto p = join(path, key);
    if (key == "trials") c.trials = count_of(kv.second, p);
    else if (key == "seed") c.seed = scalar<std::uint64_t>(kv.second, p);
    else if (key == "threads") c.threads = static_cast<unsigned>(count_of(kv.second, p));
    else bad(p, "unknown field");
  }
}

void apply_output(const YAML::Node& node, ExperimentConfig& c, const std::string& path) {
  expect_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto p = join(path, key);
    if (key == "report") c.report_path = scalar<std::string>(kv.second, p);
    else if (key == "logs") c.log_dir = scalar<std::string>(kv.second, p);
    else bad(p, "unknown field");
  }
}

// Fields valid both in `defaults` and in each entry of `runs`.
void apply(const YAML::Node& node, ExperimentConfig& c, const std::string& path) {
  expect_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto p = join(path, key);
    const auto& v = kv.second;
    if (key == "name") c.name = scalar<std::string>(v, p);
    else if (key == "property") c.property = scalar<std::string>(v, p);
    else if (key == "protocol") c.protocol = scalar<std::string>(v, p);
    else if (key == "adversary") c.adversary = scalar<std::string>(v, p);
    else if (key == "params") apply_params(v, c, p);
    else if (key == "budgets") apply_budgets(v, c, p);
    else if (key == "run") apply_run(v, c, p);
    else if (key == "output") apply_output(v, c, p);
    else bad(p, "unknown field");
  }
}

bool protocol_free(const std::string& property) {
  return property == "lemmas" || property == "ecc-fe" || property == "cq" || property == "indist" ||
         property == "crp" || property == "tq-direct";
}

}  // namespace

void validate(const ExperimentConfig& c, const std::string& where) {
  if (c.property.empty()) bad(join(where, "property"), "missing");
  if (!kProperties.count(c.property)) bad(join(where, "property"), "unknown property '" + c.property + "'");
  if (!protocol_free(c.property) && !kProtocols.count(c.protocol))
    bad(join(where, "protocol"), "unknown protocol '" + c.protocol + "'");
  if (c.adversary != "zoo") {
    try {
      adv::member(c.adversary);
    } catch (const Error&) {
      bad(join(where, "adversary"), "unknown adversary '" + c.adversary + "'");
    }
  }
  if (c.trials < 1) bad(join(where, "run.trials"), "must be at least 1");
  if (c.n < 4 || c.n > 64) bad(join(where, "params.n"), "must lie in [4, 64]");
  if (c.k < 1 || c.k > 32) bad(join(where, "params.k"), "must lie in [1, 32]");
  if (c.count < 1) bad(join(where, "params.count"), "must be at least 1");
  if (c.pairs < 1 || c.pairs > 32) bad(join(where, "params.pairs"), "must lie in [1, 32]");
  if (c.d_noise < 1 || c.d_noise % 2 == 0) bad(join(where, "params.d_noise"), "must be odd");
  if (c.ext_d_min < 1) bad(join(where, "params.ext_d_min"), "must be at least 1");
  if (c.max_support < 2 || c.max_support > 8) bad(join(where, "params.max_support"), "must lie in [2, 8]");
  if (c.property == "attack" && c.protocol != "extpuf-original")
    bad(join(where, "protocol"), "the attack runs against extpuf-original");
  if (c.protocol == "extpuf" && c.count != 1) bad(join(where, "params.count"), "extpuf commits one string");
  if (c.protocol == "extpuf-original" && c.k != 1) bad(join(where, "params.k"), "extpuf-original needs k = 1");
  if ((c.property == "uc-sim-receiver" || c.property == "uc-sim-sender") && c.protocol != "uccompiler")
    bad(join(where, "protocol"), "simulation needs the collective backend (uccompiler)");
}

Suite parse_suite(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error("CONFIG", std::string("yaml: ") + e.what());
  }
  if (!root.IsMap()) bad("(root)", "expected a mapping");
  Suite s;
  if (!root["version"]) bad("version", "missing");
  s.version = scalar<int>(root["version"], "version");
  if (s.version != kConfigVersion) bad("version", "unsupported version " + std::to_string(s.version));

  ExperimentConfig defaults;
  YAML::Node runs;
  bool has_runs = false;
  YAML::Node flat(YAML::NodeType::Map);
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key == "version") continue;
    if (key == "suite") s.name = scalar<std::string>(kv.second, key);
    else if (key == "defaults") apply(kv.second, defaults, "defaults");
    else if (key == "runs") {
      runs = kv.second;
      has_runs = true;
    }
    else flat[key] = kv.second;
  }
  if (flat.size() > 0) apply(flat, defaults, "");

  if (!has_runs) {
    if (defaults.name.empty()) defaults.name = s.name.empty() ? defaults.property : s.name;
    validate(defaults);
    s.runs.push_back(defaults);
    return s;
  }
  if (!runs.IsSequence() || runs.size() == 0) bad("runs", "expected a non-empty list");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string path = "runs[" + std::to_string(i) + "]";
    ExperimentConfig c = defaults;
    apply(runs[i], c, path);
    if (c.name.empty()) c.name = (s.name.empty() ? c.property : s.name) + "/" + std::to_string(i);
    validate(c, path);
    s.runs.push_back(std::move(c));
  }
  return s;
}

Suite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("CONFIG", path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_suite(ss.str());
}

}  // namespace pufcom::harness
