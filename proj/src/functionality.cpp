#include "pufcom/functionality.hpp"

#include "json.hpp"
#include "pufcom/error.hpp"

namespace pufcom::func {

const char* party_name(Party p) {
  switch (p) {
    case Party::kAdversary: return "S";
    case Party::kP1: return "P1";
    case Party::kP2: return "P2";
  }
  return "?";
}

std::string Delivery::describe() const {
  std::string s = std::string(party_name(to)) + "<-";
  switch (kind) {
    case Kind::kInitialized: return s + "initialized";
    case Kind::kResponse: return s + "response:" + (response ? response->to_hex() : std::string("abort"));
    case Kind::kOutMsg: return s + "outmsg:" + payload.to_hex();
    case Kind::kInvoke: return s + "invoke:" + party_name(from) + ">" + party_name(target);
    case Kind::kHandover: return s + "handover:" + party_name(from);
    case Kind::kReceived: return s + "received";
  }
  return s;
}

std::string EventRecord::to_line() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["sid"] = sid;
  j["kind"] = kind;
  j["sender"] = party_name(sender);
  j["payload"] = payload.to_hex();
  auto& d = j["deliveries"] = nlohmann::ordered_json::array();
  for (const auto& x : deliveries) d.push_back(x.describe());
  if (!note.empty()) j["note"] = note;
  return j.dump();
}

std::string PufFunctionality::log_text() const {
  std::string out;
  for (const auto& r : log_) {
    out += r.to_line();
    out += '\n';
  }
  return out;
}

std::optional<Mode> PufFunctionality::mode_of(Sid sid) const {
  auto it = entries_.find(sid);
  if (it == entries_.end()) return std::nullopt;
  return it->second.mode;
}

std::optional<Party> PufFunctionality::owner_of(Sid sid) const {
  auto it = entries_.find(sid);
  if (it == entries_.end()) return std::nullopt;
  return it->second.owner;
}

std::optional<Party> PufFunctionality::creator_of(Sid sid) const {
  auto it = entries_.find(sid);
  if (it == entries_.end()) return std::nullopt;
  return it->second.creator;
}

PufFunctionality::Entry* PufFunctionality::find(Sid sid) {
  auto it = entries_.find(sid);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<Delivery> PufFunctionality::record(Party sender, Sid sid, std::string kind, BitString payload,
                                               std::vector<Delivery> deliveries, std::string note) {
  log_.push_back({++step_, sid, std::move(kind), sender, std::move(payload), deliveries, std::move(note)});
  return deliveries;
}

void PufFunctionality::validate(Party sender, const Message& msg) const {
  auto bad = [](const std::string& why) { throw Error("MALFORMED", why); };
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InitMsg>) {
          if (sender == Party::kAdversary || m.creator != sender) bad("init must come from its creator");
          if ((m.mode == Mode::kMalicious) != static_cast<bool>(m.program)) bad("program iff malicious");
          try {
            m.family.validate();
          } catch (const Error& e) {
            bad(std::string("bad family: ") + e.what());
          }
        } else if constexpr (std::is_same_v<T, EvalMsg>) {
          if (m.querier != sender) bad("eval must name its sender");
        } else if constexpr (std::is_same_v<T, InMsg>) {
          if (m.from != sender || sender == Party::kAdversary) bad("inmsg must name its sender");
        } else if constexpr (std::is_same_v<T, HandoverMsg>) {
          if (m.from != sender || sender == Party::kAdversary || m.to == Party::kAdversary || m.to == m.from) {
            bad("handover endpoints");
          }
        } else if constexpr (std::is_same_v<T, ReadyMsg>) {
          if (sender != Party::kAdversary) bad("ready must come from the adversary");
        } else if constexpr (std::is_same_v<T, ReceivedMsg>) {
          if (sender != Party::kAdversary) bad("received must come from the adversary");
        }
      },
      msg);
}

std::vector<Delivery> PufFunctionality::do_init(Party sender, const InitMsg& m, std::optional<std::size_t> k_state) {
  if (find(m.sid)) return record(sender, m.sid, "init", {}, {}, "ignored: sid already registered");
  Entry e;
  e.sid = m.sid;
  e.mode = m.mode;
  e.creator = m.creator;
  e.owner = m.creator;
  e.family = m.family;
  if (m.mode == Mode::kHonest) {
    e.honest = puf::sample_puf(m.family, rng_);
  } else {
    try {
      e.machine.emplace(m.program, k_state);
    } catch (const Error& err) {
      record(sender, m.sid, "init", {}, {}, std::string("rejected: ") + err.code());
      throw;
    }
    e.machine->attach_inner(puf::sample_puf(m.family, rng_));
  }
  entries_.emplace(m.sid, std::move(e));
  Delivery d;
  d.kind = Delivery::Kind::kInitialized;
  d.to = m.creator;
  d.sid = m.sid;
  return record(sender, m.sid, m.mode == Mode::kHonest ? "init" : "init-malicious", {}, {d});
}

std::vector<Delivery> PufFunctionality::do_handover(Party sender, const HandoverMsg& m) {
  Entry* e = find(m.sid);
  if (!e || e->owner != m.from) return record(sender, m.sid, "handover", {}, {}, "ignored: not the owner");
  e->owner.reset();
  e->target = m.to;
  e->previous = m.from;
  Delivery d;
  d.kind = Delivery::Kind::kInvoke;
  d.to = Party::kAdversary;
  d.sid = m.sid;
  d.from = m.from;
  d.target = m.to;
  return record(sender, m.sid, "handover", {}, {d});
}

std::vector<Delivery> PufFunctionality::do_ready(Party sender, const ReadyMsg& m) {
  Entry* e = find(m.sid);
  if (!e || !e->target) return record(sender, m.sid, "ready", {}, {}, "ignored: not in transit");
  e->owner = e->target;
  e->target.reset();
  received_.insert({m.sid, e->previous});
  Delivery d;
  d.kind = Delivery::Kind::kHandover;
  d.to = *e->owner;
  d.sid = m.sid;
  d.from = e->previous;
  return record(sender, m.sid, "ready", {}, {d});
}

std::vector<Delivery> PufFunctionality::do_received(Party sender, const ReceivedMsg& m) {
  if (!received_.count({m.sid, m.from})) return record(sender, m.sid, "received", {}, {}, "ignored: no receipt");
  Delivery d;
  d.kind = Delivery::Kind::kReceived;
  d.to = m.from;
  d.sid = m.sid;
  return record(sender, m.sid, "received", {}, {d});
}

namespace {

bool may_query(const std::optional<Party>& owner, const std::optional<Party>& target, Party who) {
  if (owner) return *owner == who;
  return target.has_value() && who == Party::kAdversary;
}

}  // namespace

bool ComMpufFunctionality::try_debit_out(Entry& e, const BitString& m) {
  if (budget_.k_out && e.out_used + m.size() > *budget_.k_out) return false;
  e.out_used += m.size();
  return true;
}

std::vector<Delivery> ComMpufFunctionality::do_eval(Party sender, const EvalMsg& m) {
  Entry* e = find(m.sid);
  if (!e || !may_query(e->owner, e->target, m.querier)) {
    return record(sender, m.sid, "eval", m.challenge, {}, "ignored: querier does not hold the token");
  }
  if (m.challenge.size() != e->family.n) throw Error("LEN_MISMATCH", "challenge length");
  Delivery resp;
  resp.kind = Delivery::Kind::kResponse;
  resp.to = m.querier;
  resp.sid = m.sid;
  resp.challenge = m.challenge;
  std::vector<Delivery> out;
  std::string note;
  if (e->mode == Mode::kHonest) {
    resp.response = e->honest->eval(m.challenge, rng_);
    out.push_back(resp);
  } else {
    auto step = e->machine->step(puf::InputKind::kQuery, m.challenge, rng_);
    resp.response = step.response;
    out.push_back(resp);
    if (step.outgoing) {
      if (try_debit_out(*e, *step.outgoing)) {
        Delivery d;
        d.kind = Delivery::Kind::kOutMsg;
        d.to = e->creator;
        d.sid = m.sid;
        d.payload = *step.outgoing;
        out.push_back(d);
      } else {
        note = "outgoing message dropped: k_out";
      }
    }
  }
  return record(sender, m.sid, "eval", m.challenge, std::move(out), std::move(note));
}

std::vector<Delivery> ComMpufFunctionality::do_inmsg(Party sender, const InMsg& m) {
  Entry* e = find(m.sid);
  if (!e || e->mode != Mode::kMalicious || e->creator != m.from) {
    return record(sender, m.sid, "inmsg", m.payload, {}, "ignored: not a malicious token of the sender");
  }
  if (budget_.k_in && e->in_used + m.payload.size() > *budget_.k_in) {
    return record(sender, m.sid, "inmsg", m.payload, {}, "ignored: k_in exhausted");
  }
  e->in_used += m.payload.size();
  auto step = e->machine->step(puf::InputKind::kMsg, m.payload, rng_);
  std::vector<Delivery> out;
  std::string note;
  if (step.outgoing) {
    if (try_debit_out(*e, *step.outgoing)) {
      Delivery d;
      d.kind = Delivery::Kind::kOutMsg;
      d.to = e->creator;
      d.sid = m.sid;
      d.payload = *step.outgoing;
      out.push_back(d);
    } else {
      note = "outgoing message dropped: k_out";
    }
  }
  return record(sender, m.sid, "inmsg", m.payload, std::move(out), std::move(note));
}

std::vector<Delivery> ComMpufFunctionality::handle(Party sender, const Message& msg) {
  validate(sender, msg);
  return std::visit(
      [&](const auto& m) -> std::vector<Delivery> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InitMsg>) return do_init(sender, m, budget_.k_state);
        if constexpr (std::is_same_v<T, EvalMsg>) return do_eval(sender, m);
        if constexpr (std::is_same_v<T, InMsg>) return do_inmsg(sender, m);
        if constexpr (std::is_same_v<T, HandoverMsg>) return do_handover(sender, m);
        if constexpr (std::is_same_v<T, ReadyMsg>) return do_ready(sender, m);
        if constexpr (std::is_same_v<T, ReceivedMsg>) return do_received(sender, m);
      },
      msg);
}

std::vector<Delivery> MpufFunctionality::handle(Party sender, const Message& msg) {
  validate(sender, msg);
  if (const auto* in = std::get_if<InMsg>(&msg)) {
    return record(sender, in->sid, "inmsg", in->payload, {}, "ignored: tokens cannot receive messages");
  }
  if (const auto* ev = std::get_if<EvalMsg>(&msg)) {
    Entry* e = find(ev->sid);
    if (!e || !may_query(e->owner, e->target, ev->querier)) {
      return record(sender, ev->sid, "eval", ev->challenge, {}, "ignored: querier does not hold the token");
    }
    if (ev->challenge.size() != e->family.n) throw Error("LEN_MISMATCH", "challenge length");
    Delivery d;
    d.kind = Delivery::Kind::kResponse;
    d.to = ev->querier;
    d.sid = ev->sid;
    d.challenge = ev->challenge;
    if (e->mode == Mode::kHonest) {
      d.response = e->honest->eval(ev->challenge, rng_);
    } else {
      d.response = e->machine->step(puf::InputKind::kQuery, ev->challenge, rng_).response;
    }
    return record(sender, ev->sid, "eval", ev->challenge, {d});
  }
  if (const auto* m = std::get_if<InitMsg>(&msg)) return do_init(sender, *m, k_state_);
  if (const auto* m = std::get_if<HandoverMsg>(&msg)) return do_handover(sender, *m);
  if (const auto* m = std::get_if<ReadyMsg>(&msg)) return do_ready(sender, *m);
  return do_received(sender, std::get<ReceivedMsg>(msg));
}

std::vector<CommitFunctionality::Note> CommitFunctionality::commit(Party from, const BitString& value) {
  if (halted_ || value_) return {};
  committer_ = from;
  value_ = value;
  const Party other = from == Party::kP1 ? Party::kP2 : Party::kP1;
  return {{other, "receipt", std::nullopt}, {Party::kAdversary, "receipt", std::nullopt}};
}

std::vector<CommitFunctionality::Note> CommitFunctionality::open(Party from) {
  if (halted_ || !value_ || from != committer_) return {};
  halted_ = true;
  const Party other = from == Party::kP1 ? Party::kP2 : Party::kP1;
  return {{other, "open", value_}, {Party::kAdversary, "open", value_}};
}

}  // namespace pufcom::func
