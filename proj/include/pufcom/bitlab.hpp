#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pufcom/bitstring.hpp"
#include "pufcom/report.hpp"

namespace pufcom::bitlab {

// |{x : d(x, c) < d}| for x in {0,1}^n, 0 <= d <= n+1. Throws OVERFLOW past 2^64-1.
std::uint64_t neighborhood_size(std::size_t n, std::size_t d);
double log2_neighborhood_size(std::size_t n, std::size_t d);

struct Distribution {
  std::vector<std::uint64_t> support;
  std::vector<double> probs;
};

// P(X = x, Y = y) stored row-major, x over [0, nx), y over [0, ny).
class JointDistribution {
 public:
  JointDistribution(std::size_t nx, std::size_t ny, std::vector<double> probs);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double operator()(std::size_t x, std::size_t y) const { return p_[x * ny_ + y]; }
  std::vector<double> marginal_x() const;
  std::vector<double> marginal_y() const;

 private:
  std::size_t nx_, ny_;
  std::vector<double> p_;
};

double min_entropy(const std::vector<double>& probs);
double max_entropy(const std::vector<double>& probs);  // log2 of the positive support
// -log2 sum_y max_x P(x, y); rows with zero marginal contribute nothing.
double avg_min_entropy(const JointDistribution& j);

// Throws SUPPORT_MISMATCH unless both distributions list the same support.
double statistical_distance(const Distribution& a, const Distribution& b);
// Distance between two empirical histograms over the union of their keys.
double empirical_distance(const std::map<std::string, std::uint64_t>& a,
                          const std::map<std::string, std::uint64_t>& b);

ExperimentReport check_entropy_lemmas(std::size_t trials, std::size_t max_support, std::uint64_t seed);

}  // namespace pufcom::bitlab
