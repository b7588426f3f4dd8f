#include "pufcom/error.hpp"
#include "pufcom/protocols.hpp"

namespace pufcom::proto {

CpufCommitter::CpufCommitter(Party self, std::string channel, CpufParams params, BitString x)
    : self_(self), channel_(std::move(channel)), params_(params), fe_(params.token.fe), x_(std::move(x)) {
  if (x_.size() != params_.k) throw Error("LEN_MISMATCH", "committed string must have k bits");
}

Sid CpufCommitter::create_token(Session& s) { return s.create_puf(self_, params_.token.puf); }

void CpufCommitter::begin(Session& s) {
  token_ = create_token(s);
  chal_ = BitString::random(s.rng(self_), params_.n);
  const auto resp = s.eval(self_, token_, chal_);
  std::tie(st_, p_) = fe_.gen(resp.response, s.rng(self_));
  before_handover(s);
  s.hand_over(self_, token_, peer_of(self_), channel_);
  s.send(self_, Message{channel_, "helper", {}}.add("p", p_.flatten()));
}

void CpufCommitter::on_event(Session& s, const Event& ev) {
  if (ev.kind != Event::Kind::kMessage || ev.message.name != "r" || committed_) return;
  r_ = ev.message.at("r");
  s.send(self_, Message{channel_, "commit", {}}.add("c", mask_commit(st_, x_, r_)));
  committed_ = true;
}

void CpufCommitter::send_opening(Session& s, const BitString& chal, const BitString& x) {
  s.send(self_, Message{channel_, "open", {}}.add("i0", encode_index(0)).add("s0", chal).add("x0", x));
}

void CpufCommitter::open(Session& s, const std::vector<std::size_t>&) { send_opening(s, chal_, x_); }

CpufVerifier::CpufVerifier(Party self, std::string channel, CpufParams params)
    : self_(self), channel_(std::move(channel)), params_(params), fe_(params.token.fe) {}

BitString CpufVerifier::choose_r(Session& s) { return BitString::random(s.rng(self_), params_.k * 3 * params_.n); }

void CpufVerifier::on_event(Session& s, const Event& ev) {
  if (failure_) return;
  if (ev.kind == Event::Kind::kPufArrived && token_ == 0) {
    token_ = ev.sid;
  } else if (ev.kind == Event::Kind::kMessage) {
    const Message& m = ev.message;
    if (m.name == "helper") {
      p_ = fe_.unflatten(m.at("p"));
    } else if (m.name == "commit" && r_sent_ && !c_) {
      c_ = m.at("c");
      if (c_->size() != r_.size()) failure_ = "MALFORMED_COMMIT";
    } else if (m.name == "open" && c_) {
      Verdict v;
      v.index = decode_index(m.at("i0"));
      v.value = m.at("x0");
      v.reason = "ok";
      try {
        const auto resp = s.eval(self_, token_, m.at("s0"));
        if (!resp.ok()) {
          v.reason = "token unavailable";
        } else if (v.value.size() != params_.k) {
          v.reason = "bad length";
        } else {
          v.accepted = mask_commit(fe_.rep(resp.response, *p_), v.value, r_) == *c_;
          if (!v.accepted) v.reason = "commitment mismatch";
        }
      } catch (const Error& e) {
        v.reason = e.code();
      }
      verdicts_.push_back(v);
    }
  }
  if (!r_sent_ && token_ != 0 && p_) {
    r_ = choose_r(s);
    r_sent_ = true;
    s.send(self_, Message{channel_, "r", {}}.add("r", r_));
  }
}

CommitView CpufVerifier::view() const {
  CommitView v;
  v.complete = c_.has_value();
  v.k = params_.k;
  if (c_) {
    v.c = {*c_};
    v.r = {r_};
  }
  return v;
}

}  // namespace pufcom::proto
