#include "pufcom/fuzzyext.hpp"

#include "pufcom/error.hpp"

namespace pufcom::fe {

namespace {

ecc::RepetitionCode inner_code(const FeParams& p) {
  const std::size_t r = 2 * p.t + 1;
  if (p.source_len == 0 || p.source_len % r != 0) {
    throw Error("CONFIG", "fe.source_len must be a positive multiple of 2t+1");
  }
  return ecc::RepetitionCode(p.source_len / r, r);
}

}  // namespace

BitString HelperData::flatten() const { return sketch.concat(hash_key).concat(hash_offset); }

FuzzyExtractor::FuzzyExtractor(FeParams params) : params_(params), code_(inner_code(params)) {
  if (params_.out_len == 0) throw Error("CONFIG", "fe.out_len must be positive");
  if (params_.out_len >= params_.source_len) throw Error("CONFIG", "fe.out_len must be below source_len");
  if (params_.out_len > code_.params().msg_len) {
    throw Error("CONFIG", "fe.out_len exceeds the entropy left after the sketch");
  }
  if (params_.m_req > params_.source_len) throw Error("CONFIG", "fe.m_req exceeds source_len");
}

std::size_t FuzzyExtractor::helper_bits() const { return 2 * params_.source_len + 2 * params_.out_len - 1; }

HelperData FuzzyExtractor::zero_helper() const {
  return {BitString(params_.source_len), BitString(params_.source_len + params_.out_len - 1),
          BitString(params_.out_len)};
}

HelperData FuzzyExtractor::unflatten(const BitString& bits) const {
  if (bits.size() != helper_bits()) throw Error("LEN_MISMATCH", "helper data length");
  const std::size_t s = params_.source_len, k = s + params_.out_len - 1;
  return {bits.slice(0, s), bits.slice(s, k), bits.slice(s + k, params_.out_len)};
}

BitString FuzzyExtractor::hash(const BitString& w, const HelperData& p) const {
  BitString out = p.hash_offset;
  for (std::size_t i = 0; i < params_.out_len; ++i) {
    if (p.hash_key.dot_at(i, w)) out.flip(i);
  }
  return out;
}

std::pair<BitString, HelperData> FuzzyExtractor::gen(const BitString& w, Rng& rng) const {
  if (w.size() != params_.source_len) throw Error("LEN_MISMATCH", "source length");
  HelperData p;
  p.sketch = w ^ code_.encode(BitString::random(rng, code_.params().msg_len));
  p.hash_key = BitString::random(rng, params_.source_len + params_.out_len - 1);
  p.hash_offset = BitString::random(rng, params_.out_len);
  return {hash(w, p), std::move(p)};
}

BitString FuzzyExtractor::rep(const BitString& w, const HelperData& p) const {
  if (w.size() != params_.source_len || p.sketch.size() != params_.source_len ||
      p.hash_key.size() != params_.source_len + params_.out_len - 1 || p.hash_offset.size() != params_.out_len) {
    throw Error("LEN_MISMATCH", "reproduction input length");
  }
  const BitString recovered = p.sketch ^ code_.encode(code_.decode(w ^ p.sketch));
  return hash(recovered, p);
}

bool check_matching(const FeParams& fe, const puf::PufParams& puf) {
  return fe.t >= puf.d_noise && fe.m_req == puf.m && fe.source_len == puf.rg;
}

std::pair<puf::PufParams, FeParams> matched_pair(std::size_t n, std::size_t out_len, std::size_t d_noise,
                                                 std::size_t d_min) {
  const std::size_t rg = (2 * d_noise + 1) * out_len;
  puf::PufParams p{n, rg, d_noise, d_min, rg};
  FeParams f{rg, out_len, d_noise, rg, 0.01};
  return {p, f};
}

}  // namespace pufcom::fe
