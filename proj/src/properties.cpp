#include <bit>
#include <cmath>

#include "pufcom/bitlab.hpp"
#include "pufcom/ecc.hpp"
#include "pufcom/error.hpp"
#include "pufcom/fuzzyext.hpp"
#include "pufcom/harness.hpp"
#include "pufcom/protocols.hpp"

namespace pufcom::harness {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ExperimentReport start(const ExperimentConfig& cfg, const char* fallback) {
  ExperimentReport r;
  r.name = cfg.name.empty() ? fallback : cfg.name;
  r.seed = cfg.seed;
  r.trials = cfg.trials;
  return r;
}

proto::TokenFamily family(const ExperimentConfig& cfg) {
  return proto::make_family(cfg.n, cfg.n, cfg.d_noise, puf::default_d_min(cfg.n));
}

// A challenge at distance >= d from every string in `avoid`.
BitString far_challenge(Rng& rng, std::size_t n, std::size_t d, const std::vector<BitString>& avoid) {
  for (;;) {
    BitString c = BitString::random(rng, n);
    bool ok = true;
    for (const auto& a : avoid) ok = ok && hamming_distance(a, c) >= d;
    if (ok) return c;
  }
}

void tally(ExperimentReport& r, bool held) { held ? ++r.successes : ++r.failures; }

}  // namespace

// Blind-guess adversary: ignores what it is given and queries uniformly.
ExperimentReport cq_experiment(const ExperimentConfig& cfg) {
  auto r = start(cfg, "cq");
  const auto fam = family(cfg);
  const std::size_t d_min = fam.puf.d_min;
  std::uint64_t hits = 0, queries = 0;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    Rng rng(mix_seed(cfg.seed, t));
    const auto token = puf::sample_puf(fam.puf, rng);
    const BitString s = BitString::random(rng, cfg.n);
    (void)token.eval(s, rng);
    bool hit = false;
    for (std::size_t q = 0; q < cfg.queries; ++q) {
      const BitString guess = BitString::random(rng, cfg.n);
      (void)token.eval(guess, rng);
      ++queries;
      if (hamming_distance(guess, s) < d_min) {
        ++hits;
        hit = true;
      }
    }
    tally(r, !hit);
    r.resources.puf_queries += cfg.queries + 1;
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(queries);
  const double ball = static_cast<double>(bitlab::neighborhood_size(cfg.n, d_min)) * std::ldexp(1.0, -static_cast<int>(cfg.n));
  r.metrics["per_query_hit_rate"] = freq;
  r.metrics["ball_fraction"] = ball;
  r.metrics["d_min"] = static_cast<double>(d_min);
  r.check("per-query hit rate at most 10 |B| / 2^n", freq <= 10 * ball, fmt(freq) + " vs " + fmt(10 * ball));
  return r;
}

// Distinguisher that reproduces a key from a far challenge and compares it.
ExperimentReport indist_experiment(const ExperimentConfig& cfg) {
  auto r = start(cfg, "indist");
  const auto fam = family(cfg);
  const fe::FuzzyExtractor fe(fam.fe);
  std::uint64_t correct = 0;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    Rng rng(mix_seed(cfg.seed, t));
    const auto token = puf::sample_puf(fam.puf, rng);
    const BitString s = BitString::random(rng, cfg.n);
    const auto [st, p] = fe.gen(token.eval(s, rng), rng);
    const BitString u = BitString::random(rng, fam.fe.out_len);
    const bool b = rng.bit();
    const BitString& given = b ? u : st;
    bool guess = rng.bit();
    for (std::size_t q = 0; q < std::max<std::size_t>(cfg.queries, 1); ++q) {
      const BitString probe = far_challenge(rng, cfg.n, fam.puf.d_min, {s});
      if (fe.rep(token.eval(probe, rng), p) == given) {
        guess = false;
        break;
      }
    }
    if (guess == b) ++correct;
    tally(r, guess != b);
  }
  const double adv = std::fabs(static_cast<double>(correct) / static_cast<double>(cfg.trials) - 0.5);
  r.metrics["advantage"] = adv;
  r.check("distinguishing advantage at most 0.02", adv <= 0.02, "advantage " + fmt(adv));
  return r;
}

// Falsification run: two guessing strategies that never come close to s.
ExperimentReport crp_experiment(const ExperimentConfig& cfg) {
  auto r = start(cfg, "crp");
  const auto fam = family(cfg);
  const fe::FuzzyExtractor fe(fam.fe);
  std::uint64_t wins = 0;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    Rng rng(mix_seed(cfg.seed, t));
    const auto token = puf::sample_puf(fam.puf, rng);
    std::vector<BitString> asked;
    for (std::size_t q = 0; q < std::max<std::size_t>(cfg.queries, 1); ++q) asked.push_back(BitString::random(rng, cfg.n));
    BitString s;
    std::pair<BitString, fe::HelperData> key;
    if (t % 2 == 0) {
      // reuse the response to a challenge just outside the ball around s
      s = asked[0];
      for (std::size_t i = 0; i < fam.puf.d_min; ++i) s.flip(i);
      key = fe.gen(token.eval(asked[0], rng), rng);
    } else {
      // answer from a token of one's own
      s = far_challenge(rng, cfg.n, fam.puf.d_min, asked);
      const auto own = puf::sample_puf(fam.puf, rng);
      key = fe.gen(own.eval(s, rng), rng);
    }
    const bool win = fe.rep(token.eval(s, rng), key.second) == key.first;
    wins += win;
    tally(r, !win);
  }
  r.metrics["adversary_wins"] = static_cast<double>(wins);
  r.check("no valid pair guessed", wins == 0, std::to_string(wins) + " wins");
  return r;
}

// The adversary hands back a freshly sampled token of the same family.
ExperimentReport tq_direct_experiment(const ExperimentConfig& cfg) {
  auto r = start(cfg, "tq-direct");
  const auto fam = family(cfg);
  const fe::FuzzyExtractor fe(fam.fe);
  std::uint64_t detected = 0, false_pos = 0;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    Rng rng(mix_seed(cfg.seed, t));
    const auto token = puf::sample_puf(fam.puf, rng);
    const BitString s = BitString::random(rng, cfg.n);
    const auto [st, p] = fe.gen(token.eval(s, rng), rng);
    const auto other = puf::sample_puf(fam.puf, rng);
    const bool caught = fe.rep(other.eval(s, rng), p) != st;
    const bool flagged = fe.rep(token.eval(s, rng), p) != st;
    detected += caught;
    false_pos += flagged;
    tally(r, caught && !flagged);
  }
  const double rate = static_cast<double>(detected) / static_cast<double>(cfg.trials);
  r.metrics["detection_rate"] = rate;
  r.metrics["false_positives"] = static_cast<double>(false_pos);
  r.check("substitution detected in at least 99%", rate >= 0.99, "rate " + fmt(rate));
  r.check("honest token never flagged", false_pos == 0);
  return r;
}

ExperimentReport ecc_fe_experiment(const ExperimentConfig& cfg) {
  auto r = start(cfg, "ecc-fe");

  // every repetition code with length <= 18, every message, every correctable error pattern
  std::uint64_t codes = 0, patterns = 0, decode_failures = 0;
  for (std::size_t factor = 1; factor <= 18; factor += 2) {
    for (std::size_t len = 1; len * factor <= 18; ++len) {
      const ecc::RepetitionCode code(len, factor);
      const std::size_t L = len * factor;
      const std::size_t t = (code.params().distance - 1) / 2;
      std::vector<std::uint32_t> errors;
      for (std::uint32_t e = 0; e < (1U << L); ++e)
        if (static_cast<std::size_t>(std::popcount(e)) <= t) errors.push_back(e);
      ++codes;
      for (std::uint32_t msg = 0; msg < (1U << len); ++msg) {
        const BitString m = BitString::from_uint(msg, len);
        const BitString c = code.encode(m);
        for (auto e : errors) {
          ++patterns;
          if (code.decode(c ^ BitString::from_uint(e, L)) != m) ++decode_failures;
        }
      }
    }
  }
  r.metrics["ecc.codes"] = static_cast<double>(codes);
  r.metrics["ecc.patterns"] = static_cast<double>(patterns);
  r.metrics["ecc.failures"] = static_cast<double>(decode_failures);
  r.check("exhaustive decoding within half the distance", decode_failures == 0,
          std::to_string(decode_failures) + " failures over " + std::to_string(patterns) + " patterns");

  // extractor round trip within t, and reproduction from a second token reading
  const auto fam = family(cfg);
  const fe::FuzzyExtractor fe(fam.fe);
  std::uint64_t rt_fail = 0, puf_fail = 0;
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    Rng rng(mix_seed(cfg.seed, i));
    const BitString w = BitString::random(rng, fam.fe.source_len);
    const auto [st, p] = fe.gen(w, rng);
    BitString w2 = w;
    const std::size_t flips = rng.below(fam.fe.t + 1);
    std::vector<std::size_t> pos(fam.fe.source_len);
    for (std::size_t j = 0; j < pos.size(); ++j) pos[j] = j;
    for (std::size_t j = 0; j < flips; ++j) {
      std::swap(pos[j], pos[j + rng.below(pos.size() - j)]);
      w2.flip(pos[j]);
    }
    const bool rt = fe.rep(w2, p) == st;
    rt_fail += !rt;

    const auto token = puf::sample_puf(fam.puf, rng);
    const BitString s = BitString::random(rng, cfg.n);
    const auto [st2, p2] = fe.gen(token.eval(s, rng), rng);
    const bool consistent = fe.rep(token.eval(s, rng), p2) == st2;
    puf_fail += !consistent;
    tally(r, rt && consistent);
  }
  r.metrics["fe.roundtrip_failures"] = static_cast<double>(rt_fail);
  r.metrics["fe.consistency_failures"] = static_cast<double>(puf_fail);
  r.check("reproduction within t always recovers the key", rt_fail == 0, std::to_string(rt_fail) + " failures");
  r.check("second token reading reproduces the key", puf_fail == 0, std::to_string(puf_fail) + " failures");

  // (st, p) against (uniform, p), fresh token per sample; two key bits and two offset bits
  const std::uint64_t samples = cfg.samples ? cfg.samples : 100000;
  std::map<std::string, std::uint64_t> real, ideal;
  Rng rng(mix_seed(cfg.seed, "uniformity"));
  for (std::uint64_t i = 0; i < samples; ++i) {
    const auto token = puf::sample_puf(fam.puf, rng);
    const auto [st, p] = fe.gen(token.eval(BitString::random(rng, cfg.n), rng), rng);
    const BitString u = BitString::random(rng, st.size());
    const std::string off = p.hash_offset.slice(0, 2).to_hex();
    ++real[st.slice(0, 2).to_hex() + off];
    ++ideal[u.slice(0, 2).to_hex() + off];
  }
  const double sd = bitlab::empirical_distance(real, ideal);
  r.metrics["fe.uniformity_distance"] = sd;
  r.check("key with helper data close to uniform with helper data", sd <= 0.02, "distance " + fmt(sd));
  return r;
}

}  // namespace pufcom::harness
