#include "pufcom/session.hpp"

#include "json.hpp"
#include "pufcom/error.hpp"

namespace pufcom::proto {

Party peer_of(Party p) { return p == Party::kP1 ? Party::kP2 : Party::kP1; }

Message& Message::add(std::string key, BitString v) {
  fields.push_back({std::move(key), std::move(v)});
  return *this;
}

bool Message::has(std::string_view key) const {
  for (const auto& f : fields)
    if (f.name == key) return true;
  return false;
}

const BitString& Message::at(std::string_view key) const {
  for (const auto& f : fields)
    if (f.name == key) return f.value;
  throw Error("MALFORMED", "message '" + name + "' lacks field '" + std::string(key) + "'");
}

std::size_t Message::bits() const {
  std::size_t b = 0;
  for (const auto& f : fields) b += f.value.size();
  return b;
}

Session::Session(std::unique_ptr<func::PufFunctionality> f, std::uint64_t seed) : f_(std::move(f)) {
  rngs_.emplace(Party::kP1, Rng(mix_seed(seed, "party-1")));
  rngs_.emplace(Party::kP2, Rng(mix_seed(seed, "party-2")));
  rngs_.emplace(Party::kAdversary, Rng(mix_seed(seed, "adversary")));
}

Rng& Session::rng(Party p) { return rngs_.at(p); }

void Session::dispatch(Party sender, const func::Message& m) {
  const std::size_t before = f_->log().size();
  std::vector<func::Delivery> ds;
  try {
    ds = f_->handle(sender, m);
  } catch (...) {
    for (std::size_t i = before; i < f_->log().size(); ++i) {
      trace_.push_back({TraceEntry::Kind::kFunctionality, round_, i, sender, sender, {}, {}});
    }
    throw;
  }
  for (std::size_t i = before; i < f_->log().size(); ++i) {
    trace_.push_back({TraceEntry::Kind::kFunctionality, round_, i, sender, sender, {}, {}});
  }
  (void)ds;
}

Sid Session::create_puf(Party owner, const puf::PufParams& family) {
  const Sid sid = next_sid_++;
  dispatch(owner, func::InitMsg{sid, func::Mode::kHonest, owner, family, nullptr});
  return sid;
}

Sid Session::create_malicious(Party owner, const puf::PufParams& family, std::shared_ptr<puf::PufProgram> program) {
  const Sid sid = next_sid_++;
  dispatch(owner, func::InitMsg{sid, func::Mode::kMalicious, owner, family, std::move(program)});
  return sid;
}

EvalResult Session::eval(Party who, Sid sid, const BitString& challenge) {
  const std::size_t before = f_->log().size();
  dispatch(who, func::EvalMsg{sid, who, challenge});
  EvalResult r;
  if (f_->log().size() == before) return r;
  const auto& rec = f_->log().back();
  for (const auto& d : rec.deliveries) {
    if (d.kind == func::Delivery::Kind::kResponse && d.to == who) {
      r.delivered = true;
      r.aborted = !d.response.has_value();
      if (d.response) r.response = *d.response;
    }
  }
  route(rec.deliveries, channel_of_.count(sid) ? channel_of_.at(sid) : std::string());
  return r;
}

void Session::send_to_token(Party who, Sid sid, const BitString& payload) {
  dispatch(who, func::InMsg{sid, who, payload});
  route(f_->log().back().deliveries, channel_of_.count(sid) ? channel_of_.at(sid) : std::string());
}

void Session::route(const std::vector<func::Delivery>& ds, const std::string& channel) {
  for (const auto& d : ds) {
    if (d.kind != func::Delivery::Kind::kOutMsg || d.to == Party::kAdversary) continue;
    Event ev;
    ev.kind = Event::Kind::kOutMsg;
    ev.channel = channel;
    ev.sid = d.sid;
    ev.payload = d.payload;
    inbox_[d.to].push_back(std::move(ev));
  }
}

void Session::hand_over(Party from, Sid sid, Party to, std::string channel) {
  handovers_.push_back({from, sid, to, std::move(channel)});
}

void Session::send(Party from, Message m) {
  ++messages_;
  message_bits_ += m.bits();
  trace_.push_back({TraceEntry::Kind::kMessage, round_, f_->log().size(), from, peer_of(from), m, {}});
  Event ev;
  ev.kind = Event::Kind::kMessage;
  ev.channel = m.channel;
  ev.message = std::move(m);
  inbox_[peer_of(from)].push_back(std::move(ev));
}

void Session::defer(Party who, Event ev) { inbox_[who].push_back(std::move(ev)); }

void Session::note(Party who, std::string text) {
  trace_.push_back({TraceEntry::Kind::kNote, round_, f_->log().size(), who, who, {}, std::move(text)});
}

void Session::attach(Party p, Endpoint* e) { endpoints_[p] = e; }

void Session::post(Party to, Event ev) {
  if (ev.kind == Event::Kind::kCommand) {
    trace_.push_back({TraceEntry::Kind::kCommand, round_, 0, Party::kAdversary, to, ev.message, {}});
  }
  inbox_[to].push_back(std::move(ev));
}

void Session::flush_handovers() {
  if (handovers_.empty()) return;
  auto batch = std::move(handovers_);
  handovers_.clear();
  std::vector<PendingHandover> moving;
  for (const auto& h : batch) {
    const std::size_t before = f_->log().size();
    dispatch(h.from, func::HandoverMsg{h.sid, h.from, h.to});
    if (f_->log().size() > before && !f_->log().back().deliveries.empty()) moving.push_back(h);
  }
  for (const auto& h : moving) {
    dispatch(Party::kAdversary, func::ReadyMsg{h.sid});
    channel_of_[h.sid] = h.channel;
    Event ev;
    ev.kind = Event::Kind::kPufArrived;
    ev.channel = h.channel;
    ev.sid = h.sid;
    inbox_[h.to].push_back(std::move(ev));
  }
  for (const auto& h : moving) {
    dispatch(Party::kAdversary, func::ReceivedMsg{h.sid, h.from});
    Event ev;
    ev.kind = Event::Kind::kPufDelivered;
    ev.channel = h.channel;
    ev.sid = h.sid;
    inbox_[h.from].push_back(std::move(ev));
  }
}

std::size_t Session::run(std::size_t max_rounds) {
  std::size_t rounds = 0;
  while (rounds < max_rounds) {
    bool any = false;
    for (auto& [p, q] : inbox_) any = any || !q.empty();
    if (!any) break;
    ++round_;
    ++rounds;
    auto current = std::move(inbox_);
    inbox_.clear();
    for (Party p : {Party::kP1, Party::kP2}) {
      auto it = current.find(p);
      if (it == current.end()) continue;
      auto ep = endpoints_.find(p);
      for (const auto& ev : it->second) {
        if (ep != endpoints_.end() && ep->second) ep->second->on_event(*this, ev);
      }
    }
    flush_handovers();
  }
  return rounds;
}

std::string Session::trace_text() const {
  std::string out;
  for (const auto& t : trace_) {
    nlohmann::ordered_json j;
    j["round"] = t.round;
    switch (t.kind) {
      case TraceEntry::Kind::kFunctionality:
        j["type"] = "fn";
        j["record"] = nlohmann::ordered_json::parse(f_->log().at(t.fn_index).to_line());
        break;
      case TraceEntry::Kind::kMessage:
      case TraceEntry::Kind::kCommand: {
        j["type"] = t.kind == TraceEntry::Kind::kMessage ? "msg" : "cmd";
        j["from"] = func::party_name(t.from);
        j["to"] = func::party_name(t.to);
        j["channel"] = t.message.channel;
        j["name"] = t.message.name;
        auto& fs = j["fields"] = nlohmann::ordered_json::object();
        for (const auto& f : t.message.fields) fs[f.name] = f.value.to_hex();
        break;
      }
      case TraceEntry::Kind::kNote:
        j["type"] = "note";
        j["party"] = func::party_name(t.from);
        j["text"] = t.note;
        break;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::uint64_t count_exchange_phases(const std::vector<func::EventRecord>& log) {
  std::uint64_t phases = 0;
  bool in_run = false;
  for (const auto& r : log) {
    const bool transfer = (r.kind == "handover" || r.kind == "ready" || r.kind == "received") && r.note.empty();
    if (transfer && !in_run) ++phases;
    in_run = transfer;
  }
  return phases;
}

std::uint64_t count_created_tokens(const std::vector<func::EventRecord>& log) {
  std::uint64_t n = 0;
  for (const auto& r : log)
    if ((r.kind == "init" || r.kind == "init-malicious") && r.note.empty()) ++n;
  return n;
}

ResourceCounters Session::resources() const {
  ResourceCounters c;
  c.pufs_created = count_created_tokens(f_->log());
  c.exchange_phases = count_exchange_phases(f_->log());
  for (const auto& r : f_->log())
    if (r.kind == "eval" && !r.deliveries.empty()) ++c.puf_queries;
  c.messages = messages_;
  c.message_bits = message_bits_;
  return c;
}

}  // namespace pufcom::proto
