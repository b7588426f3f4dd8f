#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pufcom/bitstring.hpp"
#include "pufcom/functionality.hpp"
#include "pufcom/report.hpp"
#include "pufcom/rng.hpp"

namespace pufcom::proto {

using func::Party;
using func::Sid;

Party peer_of(Party p);

struct Field {
  std::string name;
  BitString value;
};

// Party-to-party message. Fields are looked up by name.
struct Message {
  std::string channel;
  std::string name;
  std::vector<Field> fields;

  Message& add(std::string key, BitString v);
  bool has(std::string_view key) const;
  const BitString& at(std::string_view key) const;  // throws MALFORMED
  std::size_t bits() const;
};

struct Event {
  enum class Kind : std::uint8_t { kStart, kCommand, kMessage, kPufArrived, kPufDelivered, kOutMsg };
  Kind kind = Kind::kStart;
  std::string channel;
  Message message;  // kCommand and kMessage
  Sid sid = 0;      // token events
  BitString payload;
};

class Session;

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual void on_event(Session& s, const Event& ev) = 0;
};

struct EvalResult {
  bool delivered = false;  // false when the functionality ignored the query
  bool aborted = false;    // the token answered with an abort
  BitString response;
  bool ok() const { return delivered && !aborted; }
};

struct TraceEntry {
  enum class Kind : std::uint8_t { kFunctionality, kMessage, kCommand, kNote };
  Kind kind = Kind::kNote;
  std::uint64_t round = 0;
  std::size_t fn_index = 0;  // record index, or the log length when a message or note was issued
  Party from = Party::kAdversary;
  Party to = Party::kAdversary;
  Message message;
  std::string note;
};

// Deterministic round-based scheduler. Within a round each party handles the
// events queued for it (P1 first); messages and handovers issued during the
// round take effect at its end. All handovers of one round form a single
// exchange: every handover, then every ready, then every received.
class Session {
 public:
  Session(std::unique_ptr<func::PufFunctionality> f, std::uint64_t seed);

  // party side
  Sid create_puf(Party owner, const puf::PufParams& family);
  Sid create_malicious(Party owner, const puf::PufParams& family, std::shared_ptr<puf::PufProgram> program);
  EvalResult eval(Party who, Sid sid, const BitString& challenge);
  void send_to_token(Party who, Sid sid, const BitString& payload);
  void hand_over(Party from, Sid sid, Party to, std::string channel);
  void send(Party from, Message m);
  void defer(Party who, Event ev);
  void note(Party who, std::string text);
  Rng& rng(Party p);

  // driver side
  void attach(Party p, Endpoint* e);
  void post(Party to, Event ev);
  std::size_t run(std::size_t max_rounds = 100000);
  std::uint64_t round() const { return round_; }

  const func::PufFunctionality& functionality() const { return *f_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  std::string trace_text() const;
  std::string event_log_text() const { return f_->log_text(); }
  ResourceCounters resources() const;
  std::size_t fn_steps() const { return f_->log().size(); }

 private:
  void dispatch(Party sender, const func::Message& m);
  void route(const std::vector<func::Delivery>& ds, const std::string& channel);
  void flush_handovers();

  struct PendingHandover {
    Party from;
    Sid sid;
    Party to;
    std::string channel;
  };

  std::unique_ptr<func::PufFunctionality> f_;
  std::map<Party, Rng> rngs_;
  std::map<Party, Endpoint*> endpoints_;
  std::map<Party, std::deque<Event>> inbox_;
  std::vector<PendingHandover> handovers_;
  std::map<Sid, std::string> channel_of_;
  std::vector<TraceEntry> trace_;
  std::uint64_t round_ = 0;
  Sid next_sid_ = 1;
  std::uint64_t messages_ = 0, message_bits_ = 0;
};

// Exchange phases: maximal runs of consecutive handover/ready/received
// records in a functionality log.
std::uint64_t count_exchange_phases(const std::vector<func::EventRecord>& log);
std::uint64_t count_created_tokens(const std::vector<func::EventRecord>& log);

}  // namespace pufcom::proto
