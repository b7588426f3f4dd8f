#include "pufcom/pufmodel.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "pufcom/error.hpp"

namespace pufcom::puf {

namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error("INTERNAL", "libsodium failed to initialise");
}

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

void PufParams::validate() const {
  if (n == 0) throw Error("CONFIG", "puf.n must be positive");
  if (rg == 0) throw Error("CONFIG", "puf.rg must be positive");
  if (d_noise > rg) throw Error("CONFIG", "puf.d_noise must not exceed rg");
  if (d_min == 0 || d_min > n + 1) throw Error("CONFIG", "puf.d_min must be in [1, n+1]");
  if (m == 0 || m > rg) throw Error("CONFIG", "puf.m must be in [1, rg]");
}

std::size_t default_d_min(std::size_t n) { return std::max<std::size_t>(2, n / 8); }

PufInstance::PufInstance(PufParams params, std::array<std::uint8_t, 32> key) : params_(params), key_(key) {
  params_.validate();
  ensure_sodium();
}

BitString PufInstance::ideal(const BitString& s) const {
  if (s.size() != params_.n) {
    throw Error("LEN_MISMATCH", "challenge has " + std::to_string(s.size()) + " bits, expected " +
                                    std::to_string(params_.n));
  }
  // BLAKE2b keyed hash in counter mode over (counter, |s|, s)
  const auto sb = s.to_bytes();
  BitString out;
  std::uint64_t counter = 0;
  while (out.size() < params_.rg) {
    std::vector<std::uint8_t> msg;
    put_u64(msg, counter++);
    put_u64(msg, s.size());
    msg.insert(msg.end(), sb.begin(), sb.end());
    std::array<std::uint8_t, 64> h{};
    crypto_generichash(h.data(), h.size(), msg.data(), msg.size(), key_.data(), key_.size());
    const std::size_t take = std::min<std::size_t>(512, params_.rg - out.size());
    out.append(BitString::from_bytes(h.data(), take));
  }
  return out;
}

BitString PufInstance::eval(const BitString& s, Rng& noise) const {
  BitString r = ideal(s);
  const std::size_t flips = noise.below(max_flips() + 1);
  // distinct positions by partial Fisher-Yates over a small index list
  std::vector<std::size_t> chosen;
  while (chosen.size() < flips) {
    const std::size_t pos = noise.below(params_.rg);
    if (std::find(chosen.begin(), chosen.end(), pos) == chosen.end()) chosen.push_back(pos);
  }
  for (auto p : chosen) r.flip(p);
  return r;
}

PufInstance sample_puf(const PufParams& params, Rng& rng) {
  std::array<std::uint8_t, 32> key{};
  for (std::size_t i = 0; i < key.size(); i += 8) {
    const std::uint64_t v = rng.next();
    for (std::size_t b = 0; b < 8; ++b) key[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return PufInstance(params, key);
}

UnpredictabilityEstimate estimate_unpredictability(const PufParams& params, const std::vector<BitString>& queries,
                                                   const BitString& target, std::size_t samples, Rng& rng) {
  params.validate();
  if (params.rg > 16) throw Error("CONFIG", "estimator needs rg <= 16");
  UnpredictabilityEstimate est;
  if (params.d_min == params.n + 1) {
    est.vacuous = true;
    return est;
  }
  for (const auto& q : queries) {
    if (q.size() != params.n || target.size() != params.n) throw Error("LEN_MISMATCH", "query length");
    if (hamming_distance(q, target) < params.d_min) {
      throw Error("PRECONDITION_UNMET", "query within d_min of the target");
    }
  }
  // counts[y][x]: y = concatenated query responses, x = target response
  std::map<BitString, std::map<std::uint64_t, std::size_t>> counts;
  for (std::size_t i = 0; i < samples; ++i) {
    const PufInstance p = sample_puf(params, rng);
    BitString y;
    for (const auto& q : queries) y.append(p.eval(q, rng));
    ++counts[y][p.eval(target, rng).to_uint()];
  }
  double guess = 0;
  for (const auto& [y, row] : counts) {
    std::size_t mx = 0;
    for (const auto& [x, c] : row) mx = std::max(mx, c);
    guess += static_cast<double>(mx);
  }
  est.samples = samples;
  est.bits = -std::log2(guess / static_cast<double>(samples));
  return est;
}

MaliciousPufMachine::MaliciousPufMachine(std::shared_ptr<PufProgram> program, std::optional<std::size_t> k_state)
    : program_(std::move(program)), k_state_(k_state) {
  if (!program_) throw Error("MALFORMED", "machine needs a program");
  const auto want = program_->state_bits();
  if (k_state_ && (!want || *want > *k_state_)) {
    throw Error("STATE_BUDGET", "program '" + program_->name() + "' needs more state than k_state = " +
                                    std::to_string(*k_state_));
  }
}

MachineOutput MaliciousPufMachine::step(InputKind kind, const BitString& payload, Rng& noise) {
  InnerOracle oracle = [this, &noise](const BitString& s) {
    if (!inner_) throw Error("MALFORMED", "machine has no embedded PUF");
    return inner_->eval(s, noise);
  };
  BitString next = state_;
  MachineOutput out = program_->step(kind, payload, next, oracle);
  if (k_state_ && next.size() > *k_state_) {
    throw Error("STATE_BUDGET", "program '" + program_->name() + "' exceeded k_state");
  }
  state_ = std::move(next);
  return out;
}

namespace {

class LambdaProgram : public PufProgram {
 public:
  using Fn = std::function<MachineOutput(InputKind, const BitString&, BitString&, const InnerOracle&)>;
  LambdaProgram(std::string name, std::optional<std::size_t> bits, Fn fn)
      : name_(std::move(name)), bits_(bits), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  std::optional<std::size_t> state_bits() const override { return bits_; }
  MachineOutput step(InputKind kind, const BitString& payload, BitString& state, const InnerOracle& inner) override {
    return fn_(kind, payload, state, inner);
  }

 private:
  std::string name_;
  std::optional<std::size_t> bits_;
  Fn fn_;
};

}  // namespace

std::shared_ptr<PufProgram> make_program(
    std::string name, std::optional<std::size_t> state_bits,
    std::function<MachineOutput(InputKind, const BitString&, BitString&, const InnerOracle&)> fn) {
  return std::make_shared<LambdaProgram>(std::move(name), state_bits, std::move(fn));
}

std::shared_ptr<PufProgram> identity_program() {
  return make_program("identity", 0, [](InputKind kind, const BitString& s, BitString&, const InnerOracle& inner) {
    MachineOutput out;
    if (kind == InputKind::kQuery) out.response = inner(s);
    return out;
  });
}

std::shared_ptr<PufProgram> constant_program(BitString value) {
  return make_program("constant", 0, [value](InputKind kind, const BitString&, BitString&, const InnerOracle&) {
    MachineOutput out;
    if (kind == InputKind::kQuery) out.response = value;
    return out;
  });
}

std::shared_ptr<PufProgram> aborting_program() {
  return make_program("aborting", 0, [](InputKind, const BitString&, BitString&, const InnerOracle&) {
    return MachineOutput{};
  });
}

std::shared_ptr<PufProgram> query_logger_program(std::size_t capacity) {
  return make_program("query-logger", capacity,
                      [capacity](InputKind kind, const BitString& s, BitString& state, const InnerOracle& inner) {
                        MachineOutput out;
                        if (kind == InputKind::kQuery) {
                          state = s.size() <= capacity ? s : s.slice(0, capacity);
                          out.response = inner(s);
                        } else {
                          out.outgoing = state;
                        }
                        return out;
                      });
}

std::shared_ptr<PufProgram> leaking_program() {
  return make_program("leaking", 0, [](InputKind kind, const BitString& s, BitString&, const InnerOracle& inner) {
    MachineOutput out;
    if (kind == InputKind::kQuery) {
      out.response = inner(s);
      out.outgoing = s;
    }
    return out;
  });
}

}  // namespace pufcom::puf
