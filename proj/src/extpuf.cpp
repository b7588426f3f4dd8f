#include "pufcom/error.hpp"
#include "pufcom/protocols.hpp"

namespace pufcom::proto {

OriginalCommitter::OriginalCommitter(Party self, std::string channel, OriginalExtPufParams params, BitString x)
    : self_(self),
      channel_(std::move(channel)),
      params_(params),
      fe1_(params.first.fe),
      fe2_(params.second.fe),
      fe_e_(params.ext.fe),
      code_(params.code()),
      x_(std::move(x)) {
  if (x_.size() != params_.k) throw Error("LEN_MISMATCH", "committed string must have k bits");
}

void OriginalCommitter::begin(Session& s) {
  first_ = s.create_puf(self_, params_.first.puf);
  second_ = s.create_puf(self_, params_.second.puf);
  chal1_ = BitString::random(s.rng(self_), params_.n);
  chal2_ = BitString::random(s.rng(self_), params_.n);
  std::tie(st1_, p1_) = fe1_.gen(s.eval(self_, first_, chal1_).response, s.rng(self_));
  std::tie(st2_, p2_) = fe2_.gen(s.eval(self_, second_, chal2_).response, s.rng(self_));
}

void OriginalCommitter::on_event(Session& s, const Event& ev) {
  if (ev.kind == Event::Kind::kPufArrived && ext_ == 0) {
    ext_ = ev.sid;
    const auto resp = s.eval(self_, ext_, code_.encode(st1_));
    if (resp.ok() && resp.response.size() == params_.ext.fe.source_len) {
      std::tie(st_e_, p_e_) = fe_e_.gen(resp.response, s.rng(self_));
    } else {
      st_e_ = BitString(params_.ext.fe.out_len);
      p_e_ = fe_e_.zero_helper();
    }
    s.hand_over(self_, first_, peer_of(self_), channel_);
    s.hand_over(self_, second_, peer_of(self_), channel_);
    s.send(self_, Message{channel_, "helper", {}}.add("p1", p1_.flatten()).add("p2", p2_.flatten()));
  } else if (ev.kind == Event::Kind::kMessage && ev.message.name == "r" && !committed_) {
    r1_ = ev.message.at("r1");
    r2_ = ev.message.at("r2");
    s.send(self_, Message{channel_, "commit", {}}
                      .add("c1", mask_commit(st1_, x_, r1_))
                      .add("c2", mask_commit(st2_, st_e_.concat(p_e_.flatten()), r2_)));
    committed_ = true;
    after_commit_sent(s);
  }
}

void OriginalCommitter::open(Session& s, const std::vector<std::size_t>&) {
  s.hand_over(self_, ext_, peer_of(self_), channel_);
  s.send(self_, Message{channel_, "open", {}}
                    .add("s1", chal1_)
                    .add("s2", chal2_)
                    .add("x", x_)
                    .add("st_e", st_e_)
                    .add("p_e", p_e_.flatten()));
}

OriginalVerifier::OriginalVerifier(Party self, std::string channel, OriginalExtPufParams params)
    : self_(self),
      channel_(std::move(channel)),
      params_(params),
      fe1_(params.first.fe),
      fe2_(params.second.fe),
      fe_e_(params.ext.fe),
      code_(params.code()) {}

void OriginalVerifier::begin(Session& s) {
  ext_ = s.create_puf(self_, params_.ext.puf);
  tq_chal_ = BitString::random(s.rng(self_), params_.ext.puf.n);
  std::tie(tq_key_, tq_p_) = fe_e_.gen(s.eval(self_, ext_, tq_chal_).response, s.rng(self_));
  s.hand_over(self_, ext_, peer_of(self_), channel_);
}

void OriginalVerifier::on_event(Session& s, const Event& ev) {
  if (failure_) return;
  try {
    if (ev.kind == Event::Kind::kPufArrived) {
      ++arrivals_;
      if (arrivals_ == 1) first_ = ev.sid;
      if (arrivals_ == 2) second_ = ev.sid;
      if (arrivals_ == 3) returned_ = ev.sid;
    } else if (ev.kind == Event::Kind::kMessage) {
      const Message& m = ev.message;
      if (m.name == "helper" && !p1_) {
        p1_ = fe1_.unflatten(m.at("p1"));
        p2_ = fe2_.unflatten(m.at("p2"));
      } else if (m.name == "commit" && !r1_.empty() && !committed_) {
        c1_ = m.at("c1");
        c2_ = m.at("c2");
        committed_ = true;
        commit_end_step_ = s.fn_steps();
      } else if (m.name == "open" && committed_) {
        pending_open_ = m;
      }
    }
  } catch (const Error&) {
    failure_ = "MALFORMED";
    return;
  }
  if (r1_.empty() && first_ && second_ && p1_) {
    const std::size_t m = params_.ext.fe.out_len + fe_e_.helper_bits();
    r1_ = BitString::random(s.rng(self_), params_.k * params_.l());
    r2_ = BitString::random(s.rng(self_), m * params_.l());
    s.send(self_, Message{channel_, "r", {}}.add("r1", r1_).add("r2", r2_));
  }
  try_verify(s);
}

void OriginalVerifier::try_verify(Session& s) {
  if (!pending_open_ || returned_ == 0) return;
  const Message m = *pending_open_;
  pending_open_.reset();
  Verdict v;
  v.value = m.has("x") ? m.at("x") : BitString();
  try {
    const auto tq = s.eval(self_, returned_, tq_chal_);
    if (!tq.ok() || fe_e_.rep(tq.response, tq_p_) != tq_key_) {
      v.reason = "TQ_FAIL";
    } else {
      const BitString st1 = fe1_.rep(s.eval(self_, first_, m.at("s1")).response, *p1_);
      const Sid second_check = params_.literal_second_check ? first_ : second_;
      const BitString st2 = fe2_.rep(s.eval(self_, second_check, m.at("s2")).response, *p2_);
      const BitString& st_e = m.at("st_e");
      const BitString& p_e = m.at("p_e");
      const auto resp_e = s.eval(self_, returned_, code_.encode(st1));
      if (mask_commit(st1, v.value, r1_) != c1_) {
        v.reason = "first commitment mismatch";
      } else if (mask_commit(st2, st_e.concat(p_e), r2_) != c2_) {
        v.reason = "second commitment mismatch";
      } else if (!resp_e.ok() || fe_e_.rep(resp_e.response, fe_e_.unflatten(p_e)) != st_e) {
        v.reason = "second key mismatch";
      } else {
        v.accepted = true;
        v.reason = "ok";
      }
    }
  } catch (const Error& e) {
    v.reason = e.code();
  }
  verdicts_.push_back(v);
}

CommitView OriginalVerifier::view() const {
  CommitView v;
  v.complete = committed_;
  v.ext_sid = ext_;
  v.committer = peer_of(self_);
  v.k = params_.k;
  if (committed_) {
    v.c = {c1_};
    v.r = {r1_};
  }
  v.commit_end_step = commit_end_step_;
  return v;
}

}  // namespace pufcom::proto
