#include "pufcom/bitstring.hpp"

#include <bit>

#include "pufcom/error.hpp"
#include "pufcom/rng.hpp"

namespace pufcom {

namespace {
std::size_t word_count(std::size_t len) { return (len + 63) / 64; }
}  // namespace

BitString::BitString(std::size_t len, bool value)
    : len_(len), words_(word_count(len), value ? ~0ULL : 0ULL) {
  trim();
}

BitString BitString::from_bits(std::string_view bits) {
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      out.set(i, true);
    } else if (bits[i] != '0') {
      throw Error("MALFORMED", "bit string contains non-binary character");
    }
  }
  return out;
}

BitString BitString::from_uint(std::uint64_t v, std::size_t len) {
  BitString out(len);
  if (len > 0) out.words_[0] = v;
  out.trim();
  return out;
}

BitString BitString::from_bytes(const std::uint8_t* data, std::size_t len) {
  BitString out(len);
  for (std::size_t b = 0; b < (len + 7) / 8; ++b) out.words_[b / 8] |= static_cast<std::uint64_t>(data[b]) << (8 * (b % 8));
  out.trim();
  return out;
}

BitString BitString::random(Rng& rng, std::size_t len) {
  BitString out(len);
  for (auto& w : out.words_) w = rng.next();
  out.trim();
  return out;
}

void BitString::trim() {
  if (len_ % 64 != 0 && !words_.empty()) words_.back() &= (1ULL << (len_ % 64)) - 1;
}

void BitString::check_len(const BitString& o) const {
  if (len_ != o.len_) {
    throw Error("LEN_MISMATCH", std::to_string(len_) + " vs " + std::to_string(o.len_));
  }
}

bool BitString::get(std::size_t i) const {
  if (i >= len_) throw Error("OUT_OF_RANGE", "bit index " + std::to_string(i));
  return (words_[i / 64] >> (i % 64)) & 1U;
}

void BitString::set(std::size_t i, bool v) {
  if (i >= len_) throw Error("OUT_OF_RANGE", "bit index " + std::to_string(i));
  const std::uint64_t m = 1ULL << (i % 64);
  if (v) {
    words_[i / 64] |= m;
  } else {
    words_[i / 64] &= ~m;
  }
}

void BitString::flip(std::size_t i) {
  if (i >= len_) throw Error("OUT_OF_RANGE", "bit index " + std::to_string(i));
  words_[i / 64] ^= 1ULL << (i % 64);
}

std::size_t BitString::popcount() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool BitString::all_zero() const {
  for (auto w : words_)
    if (w) return false;
  return true;
}

std::uint64_t BitString::to_uint() const {
  if (len_ > 64) throw Error("OUT_OF_RANGE", "to_uint needs len <= 64");
  return words_.empty() ? 0 : words_[0];
}

BitString BitString::operator^(const BitString& o) const {
  BitString out = *this;
  out ^= o;
  return out;
}

BitString& BitString::operator^=(const BitString& o) {
  check_len(o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

BitString BitString::operator&(const BitString& o) const {
  check_len(o);
  BitString out = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= o.words_[i];
  return out;
}

BitString BitString::operator~() const {
  BitString out = *this;
  for (auto& w : out.words_) w = ~w;
  out.trim();
  return out;
}

bool BitString::operator<(const BitString& o) const {
  if (len_ != o.len_) return len_ < o.len_;
  return words_ < o.words_;
}

BitString BitString::slice(std::size_t pos, std::size_t len) const {
  if (pos + len > len_) throw Error("OUT_OF_RANGE", "slice past end");
  BitString out(len);
  if (pos % 64 == 0) {
    for (std::size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = words_[pos / 64 + w];
  } else {
    const std::size_t sh = pos % 64;
    for (std::size_t w = 0; w < out.words_.size(); ++w) {
      const std::size_t src = pos / 64 + w;
      std::uint64_t v = words_[src] >> sh;
      if (src + 1 < words_.size()) v |= words_[src + 1] << (64 - sh);
      out.words_[w] = v;
    }
  }
  out.trim();
  return out;
}

void BitString::append(const BitString& o) {
  const std::size_t old = len_;
  len_ += o.len_;
  words_.resize(word_count(len_), 0);
  const std::size_t sh = old % 64;
  for (std::size_t w = 0; w < o.words_.size(); ++w) {
    const std::size_t dst = old / 64 + w;
    words_[dst] |= o.words_[w] << sh;
    if (sh && dst + 1 < words_.size()) words_[dst + 1] |= o.words_[w] >> (64 - sh);
  }
  trim();
}

BitString BitString::concat(const BitString& o) const {
  BitString out = *this;
  out.append(o);
  return out;
}

BitString BitString::repeat(std::size_t times) const {
  BitString out;
  for (std::size_t t = 0; t < times; ++t) out.append(*this);
  return out;
}

bool BitString::dot(const BitString& o) const {
  check_len(o);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) acc ^= words_[i] & o.words_[i];
  return std::popcount(acc) & 1;
}

bool BitString::dot_at(std::size_t pos, const BitString& o) const {
  if (pos + o.len_ > len_) throw Error("OUT_OF_RANGE", "dot window past end");
  const std::size_t sh = pos % 64, base = pos / 64;
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < o.words_.size(); ++w) {
    std::uint64_t v = words_[base + w] >> sh;
    if (sh && base + w + 1 < words_.size()) v |= words_[base + w + 1] << (64 - sh);
    acc ^= v & o.words_[w];
  }
  return std::popcount(acc) & 1;
}

std::string BitString::to_bits() const {
  std::string s(len_, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

std::vector<std::uint8_t> BitString::to_bytes() const {
  std::vector<std::uint8_t> out((len_ + 7) / 8, 0);
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = static_cast<std::uint8_t>(words_[b / 8] >> (8 * (b % 8)));
  return out;
}

std::string BitString::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string s = std::to_string(len_) + ":";
  for (auto byte : to_bytes()) {
    s.push_back(digits[byte >> 4]);
    s.push_back(digits[byte & 15]);
  }
  return s;
}

BitString BitString::from_hex(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error("MALFORMED", "hex bit string needs a length prefix");
  std::size_t len = 0;
  for (char ch : text.substr(0, colon)) {
    if (ch < '0' || ch > '9') throw Error("MALFORMED", "bad length prefix");
    len = len * 10 + static_cast<std::size_t>(ch - '0');
  }
  const auto hex = text.substr(colon + 1);
  if (hex.size() != 2 * ((len + 7) / 8)) throw Error("MALFORMED", "hex length does not match prefix");
  auto nib = [](char c) -> std::uint64_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
    throw Error("MALFORMED", "bad hex digit");
  };
  BitString out(len);
  for (std::size_t b = 0; b < hex.size() / 2; ++b) {
    const std::uint64_t byte = (nib(hex[2 * b]) << 4) | nib(hex[2 * b + 1]);
    out.words_[b / 8] |= byte << (8 * (b % 8));
  }
  const auto before = out.words_;
  out.trim();
  if (before != out.words_) throw Error("MALFORMED", "bits set past declared length");
  return out;
}

std::size_t hamming_distance(const BitString& a, const BitString& b) { return (a ^ b).popcount(); }

}  // namespace pufcom
