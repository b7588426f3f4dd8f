#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pufcom/bitstring.hpp"
#include "pufcom/rng.hpp"

namespace pufcom::puf {

struct PufParams {
  std::size_t n = 0;        // challenge length
  std::size_t rg = 0;       // response length
  std::size_t d_noise = 0;  // any two evaluations differ in fewer than d_noise bits
  std::size_t d_min = 0;    // queries closer than this to the target are excluded
  std::size_t m = 0;        // claimed conditional min-entropy of a response

  void validate() const;  // throws CONFIG
  bool operator==(const PufParams&) const = default;
};

std::size_t default_d_min(std::size_t n);

// An honest PUF: a keyed pseudorandom map from challenges to rg-bit responses
// plus bounded evaluation noise.
class PufInstance {
 public:
  PufInstance(PufParams params, std::array<std::uint8_t, 32> key);

  const PufParams& params() const { return params_; }
  std::size_t max_flips() const { return params_.d_noise == 0 ? 0 : (params_.d_noise - 1) / 2; }
  BitString ideal(const BitString& s) const;
  BitString eval(const BitString& s, Rng& noise) const;

 private:
  PufParams params_;
  std::array<std::uint8_t, 32> key_;
};

PufInstance sample_puf(const PufParams& params, Rng& rng);

struct UnpredictabilityEstimate {
  double bits = 0;  // estimated average min-entropy of the response at the target
  bool vacuous = false;
  std::size_t samples = 0;
};

// Plug-in estimate of H~(PUF(target) | PUF(q_1), ..., PUF(q_t)) over freshly
// sampled PUFs. Needs rg <= 16. Throws PRECONDITION_UNMET if a query lies
// within d_min of the target.
UnpredictabilityEstimate estimate_unpredictability(const PufParams& params, const std::vector<BitString>& queries,
                                                   const BitString& target, std::size_t samples, Rng& rng);

enum class InputKind { kQuery, kMsg };

struct MachineOutput {
  std::optional<BitString> response;  // for queries; empty means the token aborts
  std::optional<BitString> outgoing;  // message for the creator, if any
};

using InnerOracle = std::function<BitString(const BitString&)>;

// Program run by a malicious PUF token. Programs that keep state must say how
// many bits they need; std::nullopt means unbounded.
class PufProgram {
 public:
  virtual ~PufProgram() = default;
  virtual std::string name() const = 0;
  virtual std::optional<std::size_t> state_bits() const { return 0; }
  virtual MachineOutput step(InputKind kind, const BitString& payload, BitString& state,
                             const InnerOracle& inner) = 0;
};

class MaliciousPufMachine {
 public:
  // Throws STATE_BUDGET when the program declares more state than k_state allows.
  MaliciousPufMachine(std::shared_ptr<PufProgram> program, std::optional<std::size_t> k_state);

  void attach_inner(PufInstance inner) { inner_ = std::move(inner); }
  bool has_inner() const { return inner_.has_value(); }
  const std::optional<PufInstance>& inner() const { return inner_; }
  const BitString& state() const { return state_; }
  std::string name() const { return program_->name(); }

  // Throws STATE_BUDGET if the program grows its state past k_state.
  MachineOutput step(InputKind kind, const BitString& payload, Rng& noise);

 private:
  std::shared_ptr<PufProgram> program_;
  std::optional<std::size_t> k_state_;
  std::optional<PufInstance> inner_;
  BitString state_;
};

// Stock programs.
std::shared_ptr<PufProgram> identity_program();                  // forwards to the inner PUF
std::shared_ptr<PufProgram> constant_program(BitString value);   // same answer for everything
std::shared_ptr<PufProgram> aborting_program();                   // never answers
std::shared_ptr<PufProgram> query_logger_program(std::size_t capacity);  // remembers the last query
std::shared_ptr<PufProgram> leaking_program();                    // reports every query to its creator

// Lambda-backed program for ad hoc strategies.
std::shared_ptr<PufProgram> make_program(
    std::string name, std::optional<std::size_t> state_bits,
    std::function<MachineOutput(InputKind, const BitString&, BitString&, const InnerOracle&)> fn);

}  // namespace pufcom::puf
