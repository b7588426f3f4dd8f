#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pufcom/bitstring.hpp"
#include "pufcom/pufmodel.hpp"
#include "pufcom/rng.hpp"

namespace pufcom::func {

using Sid = std::uint64_t;

enum class Party : std::uint8_t { kAdversary = 0, kP1 = 1, kP2 = 2 };
const char* party_name(Party p);

enum class Mode : std::uint8_t { kHonest, kMalicious };

// Per-token communication and state limits; std::nullopt is unbounded.
struct CommBudget {
  std::optional<std::size_t> k_state = 0;
  std::optional<std::size_t> k_in;
  std::optional<std::size_t> k_out = 0;
};

struct InitMsg {
  Sid sid = 0;
  Mode mode = Mode::kHonest;
  Party creator = Party::kP1;
  puf::PufParams family;
  std::shared_ptr<puf::PufProgram> program;  // malicious mode only
};
struct EvalMsg {
  Sid sid = 0;
  Party querier = Party::kP1;
  BitString challenge;
};
struct InMsg {
  Sid sid = 0;
  Party from = Party::kP1;
  BitString payload;
};
struct HandoverMsg {
  Sid sid = 0;
  Party from = Party::kP1;
  Party to = Party::kP2;
};
struct ReadyMsg {
  Sid sid = 0;
};
struct ReceivedMsg {
  Sid sid = 0;
  Party from = Party::kP1;  // the party that handed the token over
};
using Message = std::variant<InitMsg, EvalMsg, InMsg, HandoverMsg, ReadyMsg, ReceivedMsg>;

struct Delivery {
  enum class Kind : std::uint8_t { kInitialized, kResponse, kOutMsg, kInvoke, kHandover, kReceived };
  Kind kind = Kind::kInitialized;
  Party to = Party::kP1;
  Sid sid = 0;
  BitString challenge;                 // kResponse
  std::optional<BitString> response;   // kResponse; empty when the token aborted
  BitString payload;                   // kOutMsg
  Party from = Party::kP1;             // kInvoke / kHandover: previous holder
  Party target = Party::kP2;           // kInvoke: next holder

  std::string describe() const;
};

struct EventRecord {
  std::uint64_t step = 0;
  Sid sid = 0;
  std::string kind;
  Party sender = Party::kAdversary;
  BitString payload;
  std::vector<Delivery> deliveries;
  std::string note;  // why a message was ignored, if it was

  std::string to_line() const;
};

// Common interface of the PUF functionalities. handle() never throws for
// messages it is merely not ready for: those are logged and ignored.
// Malformed messages throw MALFORMED.
class PufFunctionality {
 public:
  virtual ~PufFunctionality() = default;
  virtual std::vector<Delivery> handle(Party sender, const Message& msg) = 0;
  virtual bool supports_inmsg() const = 0;

  const std::vector<EventRecord>& log() const { return log_; }
  std::string log_text() const;

  std::optional<Mode> mode_of(Sid sid) const;
  std::optional<Party> owner_of(Sid sid) const;
  std::optional<Party> creator_of(Sid sid) const;
  std::size_t tokens() const { return entries_.size(); }

 protected:
  struct Entry {
    Sid sid = 0;
    Mode mode = Mode::kHonest;
    Party creator = Party::kP1;
    std::optional<Party> owner;
    std::optional<Party> target;
    Party previous = Party::kP1;
    puf::PufParams family;
    std::optional<puf::PufInstance> honest;
    std::optional<puf::MaliciousPufMachine> machine;
    std::size_t in_used = 0;
    std::size_t out_used = 0;
  };

  explicit PufFunctionality(std::uint64_t seed) : rng_(seed) {}
  std::vector<Delivery> record(Party sender, Sid sid, std::string kind, BitString payload,
                               std::vector<Delivery> deliveries, std::string note = {});
  Entry* find(Sid sid);
  void validate(Party sender, const Message& msg) const;

  // shared cases
  std::vector<Delivery> do_init(Party sender, const InitMsg& m, std::optional<std::size_t> k_state);
  std::vector<Delivery> do_handover(Party sender, const HandoverMsg& m);
  std::vector<Delivery> do_ready(Party sender, const ReadyMsg& m);
  std::vector<Delivery> do_received(Party sender, const ReceivedMsg& m);

  Rng rng_;
  std::map<Sid, Entry> entries_;
  std::set<std::pair<Sid, Party>> received_;
  std::vector<EventRecord> log_;
  std::uint64_t step_ = 0;
};

// Tokens that may talk to their creator within the given budgets.
class ComMpufFunctionality : public PufFunctionality {
 public:
  ComMpufFunctionality(CommBudget budget, std::uint64_t seed) : PufFunctionality(seed), budget_(budget) {}
  std::vector<Delivery> handle(Party sender, const Message& msg) override;
  bool supports_inmsg() const override { return true; }
  const CommBudget& budget() const { return budget_; }

 private:
  std::vector<Delivery> do_eval(Party sender, const EvalMsg& m);
  std::vector<Delivery> do_inmsg(Party sender, const InMsg& m);
  bool try_debit_out(Entry& e, const BitString& m);

  CommBudget budget_;
};

// Malicious tokens without any communication channel.
class MpufFunctionality : public PufFunctionality {
 public:
  MpufFunctionality(std::optional<std::size_t> k_state, std::uint64_t seed)
      : PufFunctionality(seed), k_state_(k_state) {}
  std::vector<Delivery> handle(Party sender, const Message& msg) override;
  bool supports_inmsg() const override { return false; }

 private:
  std::optional<std::size_t> k_state_;
};

// Ideal bit/string commitment.
class CommitFunctionality {
 public:
  struct Note {
    Party to;
    std::string kind;  // "receipt" or "open"
    std::optional<BitString> value;
  };
  std::vector<Note> commit(Party from, const BitString& value);
  std::vector<Note> open(Party from);

  bool committed() const { return value_.has_value(); }
  bool halted() const { return halted_; }

 private:
  std::optional<Party> committer_;
  std::optional<BitString> value_;
  bool halted_ = false;
};

}  // namespace pufcom::func
