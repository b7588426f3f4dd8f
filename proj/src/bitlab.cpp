#include "pufcom/bitlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pufcom/error.hpp"
#include "pufcom/rng.hpp"

namespace pufcom::bitlab {

std::uint64_t neighborhood_size(std::size_t n, std::size_t d) {
  if (d > n + 1) throw Error("OUT_OF_RANGE", "radius exceeds n+1");
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(n, k)
  for (std::size_t k = 0; k < d; ++k) {
    if (total > ~0ULL - binom) throw Error("OVERFLOW", "neighborhood size exceeds 64 bits");
    total += binom;
    if (k + 1 < d) {
      // C(n, k+1) = C(n, k) * (n-k) / (k+1), exact in 128 bits
      const unsigned __int128 next = static_cast<unsigned __int128>(binom) * (n - k) / (k + 1);
      if (next > ~0ULL) throw Error("OVERFLOW", "binomial exceeds 64 bits");
      binom = static_cast<std::uint64_t>(next);
    }
  }
  return total;
}

double log2_neighborhood_size(std::size_t n, std::size_t d) {
  if (d > n + 1) throw Error("OUT_OF_RANGE", "radius exceeds n+1");
  if (d == 0) return -INFINITY;
  // log-sum-exp over log2 C(n, k)
  std::vector<double> terms;
  for (std::size_t k = 0; k < d; ++k) {
    terms.push_back((std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) / std::log(2.0));
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  double s = 0;
  for (double t : terms) s += std::exp2(t - mx);
  return mx + std::log2(s);
}

JointDistribution::JointDistribution(std::size_t nx, std::size_t ny, std::vector<double> probs)
    : nx_(nx), ny_(ny), p_(std::move(probs)) {
  if (p_.size() != nx_ * ny_) throw Error("MALFORMED", "joint table has wrong size");
  double s = 0;
  for (double v : p_) {
    if (!(v >= 0)) throw Error("MALFORMED", "negative probability");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw Error("MALFORMED", "probabilities do not sum to 1");
}

std::vector<double> JointDistribution::marginal_x() const {
  std::vector<double> m(nx_, 0);
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t y = 0; y < ny_; ++y) m[x] += (*this)(x, y);
  return m;
}

std::vector<double> JointDistribution::marginal_y() const {
  std::vector<double> m(ny_, 0);
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t y = 0; y < ny_; ++y) m[y] += (*this)(x, y);
  return m;
}

double min_entropy(const std::vector<double>& probs) {
  return -std::log2(*std::max_element(probs.begin(), probs.end()));
}

double max_entropy(const std::vector<double>& probs) {
  return std::log2(static_cast<double>(std::count_if(probs.begin(), probs.end(), [](double p) { return p > 0; })));
}

double avg_min_entropy(const JointDistribution& j) {
  double s = 0;
  for (std::size_t y = 0; y < j.ny(); ++y) {
    double mx = 0;
    for (std::size_t x = 0; x < j.nx(); ++x) mx = std::max(mx, j(x, y));
    s += mx;
  }
  return -std::log2(s);
}

double statistical_distance(const Distribution& a, const Distribution& b) {
  if (a.support != b.support || a.probs.size() != a.support.size() || b.probs.size() != b.support.size()) {
    throw Error("SUPPORT_MISMATCH", "distributions are over different supports");
  }
  double s = 0;
  for (std::size_t i = 0; i < a.probs.size(); ++i) s += std::abs(a.probs[i] - b.probs[i]);
  return s / 2;
}

double empirical_distance(const std::map<std::string, std::uint64_t>& a,
                          const std::map<std::string, std::uint64_t>& b) {
  std::map<std::string, std::pair<double, double>> cells;
  double ta = 0, tb = 0;
  for (const auto& [k, v] : a) {
    cells[k].first += static_cast<double>(v);
    ta += static_cast<double>(v);
  }
  for (const auto& [k, v] : b) {
    cells[k].second += static_cast<double>(v);
    tb += static_cast<double>(v);
  }
  if (ta == 0 || tb == 0) throw Error("MALFORMED", "empty histogram");
  Distribution da, db;
  std::uint64_t idx = 0;
  for (const auto& [k, v] : cells) {
    da.support.push_back(idx);
    db.support.push_back(idx++);
    da.probs.push_back(v.first / ta);
    db.probs.push_back(v.second / tb);
  }
  return statistical_distance(da, db);
}

namespace {

constexpr double kTol = 1e-9;

std::vector<double> random_probs(Rng& rng, std::size_t count) {
  std::vector<double> w(count);
  double s = 0;
  for (auto& v : w) {
    v = rng.below(4) == 0 ? 0.0 : rng.uniform01();
    s += v;
  }
  if (s == 0) {
    w[rng.below(count)] = 1;
    s = 1;
  }
  for (auto& v : w) v /= s;
  return w;
}

std::size_t pick_size(Rng& rng, std::size_t max_support) { return 1 + rng.below(max_support); }

// Table over (x, y, z) flattened as x*ny*nz + y*nz + z.
struct Table3 {
  std::size_t nx, ny, nz;
  std::vector<double> p;
  double at(std::size_t x, std::size_t y, std::size_t z) const { return p[(x * ny + y) * nz + z]; }

  JointDistribution x_given_yz() const { return {nx, ny * nz, p}; }
  JointDistribution x_given_y() const {
    std::vector<double> q(nx * ny, 0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t z = 0; z < nz; ++z) q[x * ny + y] += at(x, y, z);
    return {nx, ny, std::move(q)};
  }
  JointDistribution x_given_z() const {
    std::vector<double> q(nx * nz, 0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t z = 0; z < nz; ++z) q[x * nz + z] += at(x, y, z);
    return {nx, nz, std::move(q)};
  }
  std::vector<double> z_marginal() const {
    std::vector<double> m(nz, 0);
    for (std::size_t i = 0; i < p.size(); ++i) m[i % nz] += p[i];
    return m;
  }
};

// Renormalise after summing so that tiny float drift never trips the 1e-12 guard.
std::vector<double> renorm(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

struct LemmaTally {
  std::map<std::string, std::uint64_t> evaluated, violated;
  void record(const std::string& name, bool ok) {
    ++evaluated[name];
    if (!ok) ++violated[name];
  }
};

void lemma_function(Rng& rng, std::size_t ms, LemmaTally& t) {
  const std::size_t nx = pick_size(rng, ms), ny = pick_size(rng, ms), nz = pick_size(rng, ms);
  JointDistribution j(nx, ny, random_probs(rng, nx * ny));
  std::vector<std::size_t> f(ny);
  for (auto& v : f) v = rng.below(nz);
  std::vector<double> q(nx * nz, 0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) q[x * nz + f[y]] += j(x, y);
  JointDistribution jf(nx, nz, renorm(q));
  t.record("function", avg_min_entropy(j) <= avg_min_entropy(jf) + kTol);
}

void lemma_independent(Rng& rng, std::size_t ms, LemmaTally& t) {
  const std::size_t nx = pick_size(rng, ms), ny = pick_size(rng, ms), nz = pick_size(rng, ms);
  const auto pxy = random_probs(rng, nx * ny);
  const auto pz = random_probs(rng, nz);
  std::vector<double> p(nx * ny * nz);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z) p[(x * ny + y) * nz + z] = pxy[x * ny + y] * pz[z];
  Table3 tb{nx, ny, nz, renorm(p)};
  const double lhs = avg_min_entropy(tb.x_given_yz());
  const double rhs = avg_min_entropy(tb.x_given_y());
  t.record("independent", std::abs(lhs - rhs) <= kTol);

  // X independent of Z alone
  const auto px = random_probs(rng, nx);
  std::vector<double> q(nx * nz);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z) q[x * nz + z] = px[x] * pz[z];
  JointDistribution jxz(nx, nz, renorm(q));
  t.record("independent", std::abs(avg_min_entropy(jxz) - min_entropy(jxz.marginal_x())) <= kTol);
}

void lemma_minentropy(Rng& rng, std::size_t ms, LemmaTally& t) {
  // (A, W, Y) arbitrary; X_a = perm_a(W) so every X_a has the same conditional entropy.
  const std::size_t na = pick_size(rng, ms), nw = pick_size(rng, ms), ny = pick_size(rng, ms);
  const auto p = random_probs(rng, na * nw * ny);
  std::vector<std::vector<std::size_t>> perm(na, std::vector<std::size_t>(nw));
  for (auto& pm : perm) {
    std::iota(pm.begin(), pm.end(), 0);
    for (std::size_t i = nw; i > 1; --i) std::swap(pm[i - 1], pm[rng.below(i)]);
  }
  std::vector<double> wy(nw * ny, 0), xy(nw * ny, 0), pa(na, 0);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t w = 0; w < nw; ++w)
      for (std::size_t y = 0; y < ny; ++y) {
        const double v = p[(a * nw + w) * ny + y];
        wy[w * ny + y] += v;
        xy[perm[a][w] * ny + y] += v;
        pa[a] += v;
      }
  const double h = avg_min_entropy(JointDistribution(nw, ny, renorm(wy)));
  const double hxa = avg_min_entropy(JointDistribution(nw, ny, renorm(xy)));
  t.record("minentropy", hxa >= h - max_entropy(pa) - kTol);
}

void lemma_chain(Rng& rng, std::size_t ms, LemmaTally& t) {
  const std::size_t nx = pick_size(rng, ms), ny = pick_size(rng, ms), nz = pick_size(rng, ms);
  Table3 tb{nx, ny, nz, random_probs(rng, nx * ny * nz)};
  const double h0z = max_entropy(tb.z_marginal());
  t.record("chain", avg_min_entropy(tb.x_given_yz()) >= avg_min_entropy(tb.x_given_y()) - h0z - kTol);
  const auto jxz = tb.x_given_z();
  t.record("chain", avg_min_entropy(jxz) >= min_entropy(jxz.marginal_x()) - h0z - kTol);
}

void lemma_equality(Rng& rng, std::size_t ms, LemmaTally& t) {
  const std::size_t n = pick_size(rng, ms);
  JointDistribution j(n, n, random_probs(rng, n * n));
  double eq = 0;
  for (std::size_t i = 0; i < n; ++i) eq += j(i, i);
  t.record("equality", eq <= std::exp2(-avg_min_entropy(j)) + kTol);
}

void lemma_neighborhood(Rng& rng, LemmaTally& t) {
  const std::size_t n = 1 + rng.below(6);
  const std::size_t size = std::size_t{1} << n;
  const std::size_t d = 1 + rng.below(n + 1);
  JointDistribution j(size, size, random_probs(rng, size * size));
  double hit = 0;
  for (std::size_t x = 0; x < size; ++x)
    for (std::size_t y = 0; y < size; ++y)
      if (static_cast<std::size_t>(__builtin_popcountll(x ^ y)) < d) hit += j(x, y);
  const double bound = static_cast<double>(neighborhood_size(n, d)) * std::exp2(-avg_min_entropy(j));
  t.record("neighborhood", hit <= bound + kTol);
}

}  // namespace

ExperimentReport check_entropy_lemmas(std::size_t trials, std::size_t max_support, std::uint64_t seed) {
  if (max_support < 1 || max_support > 8) throw Error("CONFIG", "max_support must be in [1, 8]");
  LemmaTally tally;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(mix_seed(seed, i));
    lemma_function(rng, max_support, tally);
    lemma_independent(rng, max_support, tally);
    lemma_minentropy(rng, max_support, tally);
    lemma_chain(rng, max_support, tally);
    lemma_equality(rng, max_support, tally);
    lemma_neighborhood(rng, tally);
  }
  ExperimentReport r;
  r.name = "entropy-lemmas";
  r.seed = seed;
  std::uint64_t total_violations = 0;
  for (const auto& [name, count] : tally.evaluated) {
    const std::uint64_t v = tally.violated.count(name) ? tally.violated.at(name) : 0;
    r.trials += count;
    r.failures += v;
    r.metrics["evaluated." + name] = static_cast<double>(count);
    r.metrics["violations." + name] = static_cast<double>(v);
    total_violations += v;
  }
  r.successes = r.trials - r.failures;
  r.check("no lemma violations", total_violations == 0, std::to_string(total_violations) + " violations");
  return r;
}

}  // namespace pufcom::bitlab
