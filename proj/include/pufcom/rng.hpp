#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pufcom {

// Seeded generator. Only raw 64-bit draws from mt19937_64 are used so that
// streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  bool bit() { return next() & 1U; }
  std::uint64_t below(std::uint64_t bound);  // uniform in [0, bound)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Independent child stream; the label keeps sibling streams apart.
  Rng fork(std::string_view label);

 private:
  std::mt19937_64 eng_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view label);

}  // namespace pufcom
