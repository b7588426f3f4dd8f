#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pufcom {

class Rng;

// Fixed-length bit string. Bit i lives in word i/64 at position i%64; unused
// high bits of the last word are always zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t len, bool value = false);

  static BitString from_bits(std::string_view bits);  // "0110"
  static BitString from_uint(std::uint64_t v, std::size_t len);  // bit i = (v >> i) & 1
  static BitString from_hex(std::string_view text);  // "len:hex" as produced by to_hex
  static BitString random(Rng& rng, std::size_t len);
  static BitString from_bytes(const std::uint8_t* data, std::size_t len);  // first len bits

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }
  bool get(std::size_t i) const;
  void set(std::size_t i, bool v);
  void flip(std::size_t i);

  std::size_t popcount() const;
  bool parity() const { return popcount() & 1U; }
  bool all_zero() const;
  std::uint64_t to_uint() const;  // only for len <= 64

  BitString operator^(const BitString& o) const;
  BitString operator&(const BitString& o) const;
  BitString operator~() const;
  BitString& operator^=(const BitString& o);
  bool operator==(const BitString& o) const = default;
  bool operator<(const BitString& o) const;

  BitString slice(std::size_t pos, std::size_t len) const;
  BitString concat(const BitString& o) const;
  void append(const BitString& o);
  // This string repeated `times` times back to back.
  BitString repeat(std::size_t times) const;
  // Parity of (this AND o) without materialising the AND.
  bool dot(const BitString& o) const;
  // Parity of (slice(pos, o.size()) AND o).
  bool dot_at(std::size_t pos, const BitString& o) const;

  std::string to_bits() const;
  std::string to_hex() const;  // "len:hex", bytes little-endian in bit order
  std::vector<std::uint8_t> to_bytes() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  void trim();
  void check_len(const BitString& o) const;

  std::size_t len_ = 0;
  std::vector<std::uint64_t> words_;
};

std::size_t hamming_distance(const BitString& a, const BitString& b);

}  // namespace pufcom
