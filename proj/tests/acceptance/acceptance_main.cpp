#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>

#include "pufcom/error.hpp"
#include "pufcom/harness.hpp"

namespace fs = std::filesystem;
using namespace pufcom;

// One YAML suite per criterion in <dir>/acceptance, named NN-<criterion>.yaml.
// Usage: acceptance [config-dir] [criterion numbers...]
int main(int argc, char** argv) {
  fs::path dir = fs::path(PUFCOM_CONFIG_DIR) / "acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (!a.empty() && std::all_of(a.begin(), a.end(), ::isdigit)) only.insert(std::stoi(a));
    else dir = a;
  }

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".yaml") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "no acceptance configs in " << dir << "\n";
    return 2;
  }

  int failed = 0, ran = 0;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const int num = std::atoi(stem.c_str());
    if (!only.empty() && !only.count(num)) continue;
    const std::string crit = stem.substr(stem.find('-') + 1);
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    std::size_t runs = 0;
    try {
      for (const auto& cfg : harness::load_suite(f.string()).runs) {
        const auto r = harness::run_experiment(cfg);
        ++runs;
        std::cerr << r.summary_table() << "\n";
        if (!r.passed()) {
          ok = false;
          for (const auto& c : r.checks)
            if (!c.passed) why += " [" + r.name + ": " + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")") + "]";
        }
      }
    } catch (const Error& e) {
      ok = false;
      why += std::string(" [error ") + e.code() + ": " + e.what() + "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %02d %s  (%zu runs, %.1fs)%s\n", ok ? "PASS" : "FAIL", num, crit.c_str(), runs, secs, why.c_str());
    std::fflush(stdout);
    ++ran;
    failed += !ok;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed ? 1 : 0;
}
