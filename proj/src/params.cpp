#include "pufcom/error.hpp"
#include "pufcom/protocols.hpp"

namespace pufcom::proto {

TokenFamily make_family(std::size_t challenge_len, std::size_t out_len, std::size_t d_noise, std::size_t d_min) {
  if (d_noise == 0) throw Error("CONFIG", "d_noise must be at least 1");
  auto [p, f] = fe::matched_pair(challenge_len, out_len, d_noise, d_min);
  p.validate();
  return {p, f};
}

CpufParams make_cpuf_params(std::size_t n, std::size_t k, std::size_t d_noise) {
  if (n == 0 || k == 0) throw Error("CONFIG", "n and k must be positive");
  return {n, k, make_family(n, k * 3 * n, d_noise, puf::default_d_min(n))};
}

ExtPufParams make_extpuf_params(std::size_t n, std::size_t k, std::size_t count, std::size_t d_noise,
                                std::size_t ext_out, std::size_t ext_d_min) {
  if (n == 0 || k == 0 || count == 0) throw Error("CONFIG", "n, k and count must be positive");
  ExtPufParams p;
  p.n = n;
  p.k = k;
  p.count = count;
  p.ext_d_min = ext_d_min;
  p.token = make_family(n, k * n, d_noise, puf::default_d_min(n));
  const std::size_t ext_len = k * n * (2 * ext_d_min - 1);
  p.ext = make_family(ext_len, ext_out ? ext_out : n, d_noise, ext_d_min);
  return p;
}

OriginalExtPufParams make_original_params(std::size_t n, std::size_t k, std::size_t d_noise, std::size_t ext_out,
                                          std::size_t ext_d_min) {
  OriginalExtPufParams p;
  p.n = n;
  p.k = k;
  p.ext_d_min = ext_d_min;
  const std::size_t l = 3 * n;
  p.first = make_family(n, k * l, d_noise, puf::default_d_min(n));
  p.ext = make_family(k * l * (2 * ext_d_min - 1), ext_out, d_noise, ext_d_min);
  const std::size_t m = ext_out + fe::FuzzyExtractor(p.ext.fe).helper_bits();
  p.second = make_family(n, m * l, d_noise, puf::default_d_min(n));
  return p;
}

BitString mask_commit(const BitString& st, const BitString& x, const BitString& r) {
  if (x.empty() || r.size() % x.size() != 0) throw Error("LEN_MISMATCH", "mask length is not a multiple of |x|");
  return st ^ (x.repeat(r.size() / x.size()) & r);
}

BitString encode_index(std::size_t i) { return BitString::from_uint(i, 32); }
std::size_t decode_index(const BitString& b) {
  if (b.size() != 32) throw Error("MALFORMED", "index field");
  return static_cast<std::size_t>(b.to_uint());
}

std::vector<Verdict> MultiVerifier::take_verdicts() {
  std::vector<Verdict> out(verdicts_.begin() + static_cast<std::ptrdiff_t>(taken_), verdicts_.end());
  taken_ = verdicts_.size();
  return out;
}

void CommitterParty::on_event(Session& s, const Event& ev) {
  if (ev.kind == Event::Kind::kStart && ev.channel.empty()) {
    c_.begin(s);
  } else if (ev.kind == Event::Kind::kCommand && ev.message.name == "open") {
    std::vector<std::size_t> all(c_.count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    c_.open(s, all);
  } else {
    c_.on_event(s, ev);
  }
}

void VerifierParty::on_event(Session& s, const Event& ev) {
  if (ev.kind == Event::Kind::kStart && ev.channel.empty()) {
    v_.begin(s);
  } else {
    v_.on_event(s, ev);
  }
}

}  // namespace pufcom::proto
