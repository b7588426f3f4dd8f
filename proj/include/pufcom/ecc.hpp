#pragma once

#include <cstddef>

#include "pufcom/bitstring.hpp"

namespace pufcom::ecc {

struct EccParams {
  std::size_t msg_len = 0;
  std::size_t code_len = 0;
  std::size_t distance = 0;
};

// Repetition code with an odd factor, bit-major: message bit i fills
// positions [i*r, (i+1)*r). Majority decoding corrects (r-1)/2 errors per block.
class RepetitionCode {
 public:
  RepetitionCode(std::size_t msg_len, std::size_t factor);

  EccParams params() const { return {msg_len_, msg_len_ * r_, r_}; }
  std::size_t factor() const { return r_; }
  BitString encode(const BitString& m) const;
  BitString decode(const BitString& c) const;

 private:
  std::size_t msg_len_;
  std::size_t r_;
};

// Code whose decoding radius covers everything closer than d_min to a codeword.
RepetitionCode code_for_min_distance(std::size_t msg_len, std::size_t d_min);

}  // namespace pufcom::ecc
