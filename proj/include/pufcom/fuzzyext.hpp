#pragma once

#include <cstddef>
#include <utility>

#include "pufcom/bitstring.hpp"
#include "pufcom/ecc.hpp"
#include "pufcom/pufmodel.hpp"
#include "pufcom/rng.hpp"

namespace pufcom::fe {

struct FeParams {
  std::size_t source_len = 0;
  std::size_t out_len = 0;
  std::size_t t = 0;      // tolerated distance between enrollment and reproduction
  std::size_t m_req = 0;  // min-entropy the source must have
  double eps = 0;

  bool operator==(const FeParams&) const = default;
};

// Public helper data: the code-offset sketch and the hash key.
struct HelperData {
  BitString sketch;
  BitString hash_key;     // source_len + out_len - 1 bits
  BitString hash_offset;  // out_len bits

  BitString flatten() const;
  bool operator==(const HelperData&) const = default;
};

// Code-offset sketch over a repetition code with factor 2t+1, followed by a
// Hankel-matrix universal hash with a random offset.
class FuzzyExtractor {
 public:
  explicit FuzzyExtractor(FeParams params);

  const FeParams& params() const { return params_; }
  std::size_t helper_bits() const;
  HelperData zero_helper() const;
  HelperData unflatten(const BitString& bits) const;

  std::pair<BitString, HelperData> gen(const BitString& w, Rng& rng) const;
  BitString rep(const BitString& w, const HelperData& p) const;

 private:
  BitString hash(const BitString& w, const HelperData& p) const;

  FeParams params_;
  ecc::RepetitionCode code_;
};

// True when the extractor tolerates the PUF's noise, expects exactly its
// entropy and consumes responses of its length.
bool check_matching(const FeParams& fe, const puf::PufParams& puf);

// Smallest matching extractor for a PUF family producing out_len-bit keys.
// Picks rg = (2*d_noise + 1) * out_len.
std::pair<puf::PufParams, FeParams> matched_pair(std::size_t n, std::size_t out_len, std::size_t d_noise,
                                                 std::size_t d_min);

}  // namespace pufcom::fe
