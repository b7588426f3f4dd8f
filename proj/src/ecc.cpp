#include "pufcom/ecc.hpp"

#include "pufcom/error.hpp"

namespace pufcom::ecc {

RepetitionCode::RepetitionCode(std::size_t msg_len, std::size_t factor) : msg_len_(msg_len), r_(factor) {
  if (factor == 0 || factor % 2 == 0) throw Error("CONFIG", "repetition factor must be odd");
}

BitString RepetitionCode::encode(const BitString& m) const {
  if (m.size() != msg_len_) throw Error("LEN_MISMATCH", "message length");
  BitString c(msg_len_ * r_);
  for (std::size_t i = 0; i < msg_len_; ++i) {
    if (!m.get(i)) continue;
    for (std::size_t j = 0; j < r_; ++j) c.set(i * r_ + j, true);
  }
  return c;
}

BitString RepetitionCode::decode(const BitString& c) const {
  if (c.size() != msg_len_ * r_) throw Error("LEN_MISMATCH", "codeword length");
  BitString m(msg_len_);
  for (std::size_t i = 0; i < msg_len_; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < r_; ++j) ones += c.get(i * r_ + j);
    m.set(i, 2 * ones > r_);
  }
  return m;
}

RepetitionCode code_for_min_distance(std::size_t msg_len, std::size_t d_min) {
  if (d_min == 0) throw Error("CONFIG", "d_min must be positive");
  return RepetitionCode(msg_len, 2 * d_min - 1);
}

}  // namespace pufcom::ecc
