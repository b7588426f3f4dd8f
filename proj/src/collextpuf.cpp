#include "pufcom/error.hpp"
#include "pufcom/protocols.hpp"

namespace pufcom::proto {

namespace {
std::string key(const char* base, std::size_t i) { return base + std::to_string(i); }

// "<prefix>.<i>" -> i
std::optional<std::size_t> sub_index(const std::string& prefix, const std::string& channel) {
  if (channel.size() <= prefix.size() + 1 || channel.compare(0, prefix.size(), prefix) != 0 ||
      channel[prefix.size()] != '.') {
    return std::nullopt;
  }
  std::size_t v = 0;
  for (std::size_t p = prefix.size() + 1; p < channel.size(); ++p) {
    if (channel[p] < '0' || channel[p] > '9') return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(channel[p] - '0');
  }
  return v;
}
}  // namespace

CollCommitter::CollCommitter(Party self, std::string channel, ExtPufParams params, std::vector<BitString> xs)
    : self_(self),
      channel_(std::move(channel)),
      params_(params),
      fe_(params.token.fe),
      fe_e_(params.ext.fe),
      code_(params.code()),
      xs_(std::move(xs)) {
  if (xs_.size() != params_.count) throw Error("LEN_MISMATCH", "need one string per commitment");
  for (const auto& x : xs_)
    if (x.size() != params_.k) throw Error("LEN_MISMATCH", "committed strings must have k bits");
}

Sid CollCommitter::create_token(Session& s) { return s.create_puf(self_, params_.token.puf); }

void CollCommitter::begin(Session& s) {
  token_ = create_token(s);
  Message helper{channel_, "helper", {}};
  for (std::size_t i = 0; i < params_.count; ++i) {
    chal_.push_back(BitString::random(s.rng(self_), params_.n));
    const auto resp = s.eval(self_, token_, chal_.back());
    auto [st, p] = fe_.gen(resp.response, s.rng(self_));
    st_.push_back(st);
    helper.add(key("p", i), p.flatten());
    p_.push_back(std::move(p));
  }
  before_handover(s);
  s.hand_over(self_, token_, peer_of(self_), channel_);
  s.send(self_, std::move(helper));
}

std::pair<BitString, fe::HelperData> CollCommitter::ext_key(Session& s, Sid ext, const BitString& k) {
  const auto resp = s.eval(self_, ext, code_.encode(k));
  if (!resp.ok() || resp.response.size() != params_.ext.fe.source_len) {
    return {BitString(params_.ext.fe.out_len), fe_e_.zero_helper()};
  }
  return fe_e_.gen(resp.response, s.rng(self_));
}

void CollCommitter::handle_ext(Session& s, Sid ext) {
  for (std::size_t i = 0; i < params_.count; ++i) {
    auto [st_e, p_e] = ext_key(s, ext, st_[i]);
    st_e_.push_back(std::move(st_e));
    p_e_.push_back(std::move(p_e));
  }
  before_return(s, ext);
  s.hand_over(self_, ext, peer_of(self_), channel_);
}

void CollCommitter::on_event(Session& s, const Event& ev) {
  if (ev.kind == Event::Kind::kPufArrived && ext_ == 0) {
    ext_ = ev.sid;
    handle_ext(s, ext_);
  } else if (ev.kind == Event::Kind::kMessage && ev.message.name == "r" && !committed_) {
    Message c{channel_, "commit", {}};
    for (std::size_t i = 0; i < params_.count; ++i) {
      r_.push_back(ev.message.at(key("r", i)));
      c.add(key("c", i), mask_commit(st_[i], xs_[i], r_.back()));
    }
    s.send(self_, std::move(c));
    committed_ = true;
    after_commit_sent(s);
  }
}

CollCommitter::Opening CollCommitter::honest_opening(std::size_t i) const {
  return {chal_.at(i), xs_.at(i), st_e_.at(i), p_e_.at(i)};
}

void CollCommitter::send_openings(Session& s, const std::vector<std::pair<std::size_t, Opening>>& openings) {
  Message m{channel_, "open", {}};
  for (std::size_t t = 0; t < openings.size(); ++t) {
    const auto& [i, o] = openings[t];
    m.add(key("i", t), encode_index(i));
    m.add(key("s", t), o.chal);
    m.add(key("x", t), o.x);
    m.add(key("st_e", t), o.st_e);
    m.add(key("p_e", t), o.p_e.flatten());
  }
  s.send(self_, std::move(m));
}

void CollCommitter::open(Session& s, const std::vector<std::size_t>& indices) {
  std::vector<std::pair<std::size_t, Opening>> o;
  for (auto i : indices) o.emplace_back(i, honest_opening(i));
  send_openings(s, o);
}

CollVerifier::CollVerifier(Party self, std::string channel, ExtPufParams params)
    : self_(self),
      channel_(std::move(channel)),
      params_(params),
      fe_(params.token.fe),
      fe_e_(params.ext.fe),
      code_(params.code()) {}

Sid CollVerifier::create_ext(Session& s) { return s.create_puf(self_, params_.ext.puf); }

void CollVerifier::begin(Session& s) {
  ext_ = create_ext(s);
  tq_chal_ = BitString::random(s.rng(self_), params_.ext.puf.n);
  const auto resp = s.eval(self_, ext_, tq_chal_);
  if (resp.ok()) std::tie(tq_key_, tq_p_) = fe_e_.gen(resp.response, s.rng(self_));
  s.hand_over(self_, ext_, peer_of(self_), channel_);
}

bool CollVerifier::test_query(Session& s, Sid returned) {
  try {
    const auto resp = s.eval(self_, returned, tq_chal_);
    return resp.ok() && fe_e_.rep(resp.response, tq_p_) == tq_key_;
  } catch (const Error&) {
    return false;
  }
}

BitString CollVerifier::choose_r(Session& s, std::size_t) {
  return BitString::random(s.rng(self_), params_.k * params_.n);
}

void CollVerifier::fail(Session& s, std::string why) {
  s.note(self_, channel_ + ": " + why);
  failure_ = std::move(why);
}

Verdict CollVerifier::check_opening(Session& s, std::size_t i, const BitString& chal, const BitString& x,
                                    const BitString& st_e, const BitString& p_e_bits) {
  Verdict v;
  v.index = i;
  v.value = x;
  try {
    if (i >= params_.count) throw Error("MALFORMED", "index out of range");
    if (x.size() != params_.k) throw Error("LEN_MISMATCH", "opened string length");
    const auto resp = s.eval(self_, token_, chal);
    if (!resp.ok()) {
      v.reason = "token unavailable";
      return v;
    }
    const BitString st = fe_.rep(resp.response, p_[i]);
    if (mask_commit(st, x, r_[i]) != c_[i]) {
      v.reason = "commitment mismatch";
      return v;
    }
    const auto resp_e = s.eval(self_, returned_, code_.encode(st));
    if (!resp_e.ok() || fe_e_.rep(resp_e.response, fe_e_.unflatten(p_e_bits)) != st_e) {
      v.reason = "second key mismatch";
      return v;
    }
    v.accepted = true;
    v.reason = "ok";
  } catch (const Error& e) {
    v.reason = e.code();
  }
  return v;
}

void CollVerifier::on_event(Session& s, const Event& ev) {
  if (failure_) return;
  if (ev.kind == Event::Kind::kPufArrived) {
    ++arrivals_;
    if (arrivals_ == 1) {
      token_ = ev.sid;
      return;
    }
    if (arrivals_ != 2) return;
    // Tokens carry no trustworthy label: whatever comes back second is taken as the returned one.
    returned_ = ev.sid;
    if (p_.size() != params_.count) return fail(s, "MISSING_HELPER");
    if (!test_query(s, returned_)) return fail(s, "TQ_FAIL");
    Message m{channel_, "r", {}};
    for (std::size_t i = 0; i < params_.count; ++i) {
      r_.push_back(choose_r(s, i));
      m.add(key("r", i), r_.back());
    }
    r_sent_ = true;
    s.send(self_, std::move(m));
    return;
  }
  if (ev.kind != Event::Kind::kMessage) return;
  const Message& m = ev.message;
  try {
    if (m.name == "helper" && p_.empty()) {
      for (std::size_t i = 0; i < params_.count; ++i) p_.push_back(fe_.unflatten(m.at(key("p", i))));
    } else if (m.name == "commit" && r_sent_ && !committed_) {
      for (std::size_t i = 0; i < params_.count; ++i) {
        c_.push_back(m.at(key("c", i)));
        if (c_.back().size() != params_.k * params_.n) throw Error("MALFORMED", "commitment length");
      }
      committed_ = true;
      commit_end_step_ = s.fn_steps();
      on_committed(s);
    } else if (m.name == "open" && committed_) {
      for (std::size_t t = 0; m.has(key("i", t)); ++t) {
        verdicts_.push_back(check_opening(s, decode_index(m.at(key("i", t))), m.at(key("s", t)), m.at(key("x", t)),
                                          m.at(key("st_e", t)), m.at(key("p_e", t))));
      }
    }
  } catch (const Error&) {
    fail(s, "MALFORMED");
  }
}

CommitView CollVerifier::view() const {
  CommitView v;
  v.complete = committed_;
  v.ext_sid = ext_;
  v.committer = peer_of(self_);
  v.k = params_.k;
  v.c = c_;
  v.r = r_;
  v.commit_end_step = commit_end_step_;
  return v;
}

PerStringCommitter::PerStringCommitter(Party self, std::string prefix, ExtPufParams single, std::vector<BitString> xs)
    : self_(self), prefix_(std::move(prefix)) {
  single.count = 1;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    subs_.push_back(
        std::make_unique<CollCommitter>(self, prefix_ + "." + std::to_string(i), single, std::vector{xs[i]}));
  }
}

void PerStringCommitter::begin(Session& s) {
  if (subs_.empty()) return;
  started_ = 1;
  subs_[0]->begin(s);
}

void PerStringCommitter::on_event(Session& s, const Event& ev) {
  if (ev.kind == Event::Kind::kStart && ev.channel == prefix_ + ".next") {
    start_upto(s, decode_index(ev.payload));
    return;
  }
  const auto i = sub_index(prefix_, ev.channel);
  if (!i || *i >= subs_.size()) return;
  // the verifier may open session i before our deferred start fires
  start_upto(s, *i);
  const bool was = subs_[*i]->committed();
  subs_[*i]->on_event(s, ev);
  if (!was && subs_[*i]->committed() && *i + 1 < subs_.size()) {
    // next session starts in the round the verifier learns of this commitment
    Event next;
    next.kind = Event::Kind::kStart;
    next.channel = prefix_ + ".next";
    next.payload = encode_index(*i + 1);
    s.defer(self_, std::move(next));
  }
}

void PerStringCommitter::start_upto(Session& s, std::size_t i) {
  while (started_ <= i && started_ < subs_.size()) subs_[started_++]->begin(s);
}

bool PerStringCommitter::committed() const {
  for (const auto& sub : subs_)
    if (!sub->committed()) return false;
  return true;
}

void PerStringCommitter::open(Session& s, const std::vector<std::size_t>& indices) {
  for (auto i : indices) subs_.at(i)->open(s, {0});
}

PerStringVerifier::PerStringVerifier(Party self, std::string prefix, ExtPufParams single, std::size_t count)
    : prefix_(std::move(prefix)) {
  single.count = 1;
  for (std::size_t i = 0; i < count; ++i) {
    subs_.push_back(std::make_unique<CollVerifier>(self, prefix_ + "." + std::to_string(i), single));
  }
}

void PerStringVerifier::begin(Session& s) {
  if (subs_.empty()) return;
  started_ = 1;
  subs_[0]->begin(s);
}

void PerStringVerifier::on_event(Session& s, const Event& ev) {
  const auto idx = sub_index(prefix_, ev.channel);
  if (!idx || *idx >= subs_.size()) return;
  const std::size_t i = *idx;
  const bool was = subs_[i]->committed();
  subs_[i]->on_event(s, ev);
  for (auto& v : subs_[i]->take_verdicts()) {
    v.index = i;
    verdicts_.push_back(v);
  }
  if (subs_[i]->failure() && !failure_) failure_ = *subs_[i]->failure();
  if (!was && subs_[i]->committed() && started_ < subs_.size()) subs_[started_++]->begin(s);
}

bool PerStringVerifier::committed() const {
  for (const auto& sub : subs_)
    if (!sub->committed()) return false;
  return true;
}

}  // namespace pufcom::proto
