#include "pufcom/adversaries.hpp"

#include "pufcom/error.hpp"
#include "pufcom/extractors.hpp"

namespace pufcom::adv {

using func::Sid;
using proto::peer_of;

namespace {

const std::vector<std::string> kTwoToken = {"extpuf", "collextpuf"};
const std::vector<std::string> kBasic = {"cpuf", "extpuf", "collextpuf"};

BitString differing(Rng& rng, const BitString& x) {
  BitString mask;
  do {
    mask = BitString::random(rng, x.size());
  } while (mask.all_zero());
  return x ^ mask;
}

// y with c == mask_commit(st, y, r), if there is one
std::optional<BitString> solve_opening(const BitString& st, const BitString& c, const BitString& r, std::size_t k) {
  const BitString diff = c ^ st;
  BitString y(k);
  for (std::size_t j = 0; j < k; ++j) {
    bool zero_ok = true, one_ok = true;
    for (std::size_t p = j; p < c.size(); p += k) {
      if (diff.get(p)) zero_ok = false;
      if (diff.get(p) != r.get(p)) one_ok = false;
    }
    if (!zero_ok && !one_ok) return std::nullopt;
    y.set(j, !zero_ok);
  }
  return y;
}

// ---- senders against the two-token protocol ----

class LateQuerySender : public proto::CollCommitter, public QueryProbe {
 public:
  using CollCommitter::CollCommitter;
  std::size_t answered_late_queries() const override { return answered_; }
  std::size_t attempted_late_queries() const override { return attempted_; }

 protected:
  void after_commit_sent(Session& s) override {
    for (std::size_t i = 0; i < params_.count; ++i) {
      ++attempted_;
      if (s.eval(self_, ext_, code_.encode(st_[i] ^ r_[i])).delivered) ++answered_;
    }
  }

 private:
  std::size_t attempted_ = 0, answered_ = 0;
};

class NeverQuerySender : public proto::CollCommitter {
 public:
  using CollCommitter::CollCommitter;

 protected:
  void handle_ext(Session& s, Sid ext) override {
    for (std::size_t i = 0; i < params_.count; ++i) {
      st_e_.push_back(BitString::random(s.rng(self_), params_.ext.fe.out_len));
      p_e_.push_back(fe_e_.unflatten(BitString::random(s.rng(self_), fe_e_.helper_bits())));
    }
    s.hand_over(self_, ext, peer_of(self_), channel_);
  }
};

class TokenSubstitutingSender : public proto::CollCommitter, public QueryProbe {
 public:
  using CollCommitter::CollCommitter;
  std::size_t answered_late_queries() const override { return answered_; }
  std::size_t attempted_late_queries() const override { return attempted_; }

 protected:
  void handle_ext(Session& s, Sid ext) override {
    for (std::size_t i = 0; i < params_.count; ++i) {
      auto [st_e, p_e] = ext_key(s, ext, st_[i]);
      st_e_.push_back(std::move(st_e));
      p_e_.push_back(std::move(p_e));
    }
    // keep the real token, hand back a fresh one of the same family
    const Sid fake = s.create_puf(self_, params_.ext.puf);
    s.hand_over(self_, fake, peer_of(self_), channel_);
  }
  void after_commit_sent(Session& s) override {
    for (std::size_t i = 0; i < params_.count; ++i) {
      ++attempted_;
      if (s.eval(self_, ext_, code_.encode(st_[i] ^ r_[i])).delivered) ++answered_;
    }
  }

 private:
  std::size_t attempted_ = 0, answered_ = 0;
};

class LeakingTokenSender : public proto::CollCommitter {
 public:
  using CollCommitter::CollCommitter;
  void on_event(Session& s, const proto::Event& ev) override {
    if (ev.kind == proto::Event::Kind::kOutMsg) {
      ++leaks_;
      return;
    }
    CollCommitter::on_event(s, ev);
  }
  std::size_t leaks() const { return leaks_; }

 protected:
  Sid create_token(Session& s) override { return s.create_malicious(self_, params_.token.puf, puf::leaking_program()); }

 private:
  std::size_t leaks_ = 0;
};

class RandomDecommitSender : public proto::CollCommitter, public Equivocator {
 public:
  using CollCommitter::CollCommitter;
  bool produced_second_opening() const override { return true; }
  void open(Session& s, const std::vector<std::size_t>& indices) override {
    std::vector<std::pair<std::size_t, Opening>> o;
    for (auto i : indices) {
      Opening h = honest_opening(i);
      Opening alt = h;
      alt.x = differing(s.rng(self_), h.x);
      o.emplace_back(i, h);
      o.emplace_back(i, alt);
    }
    send_openings(s, o);
  }
};

// Prepares a second challenge and its second-token key before r is known,
// then hopes r lines the two keys up.
class EquivocatingSender : public proto::CollCommitter, public Equivocator {
 public:
  using CollCommitter::CollCommitter;
  bool produced_second_opening() const override { return second_; }
  void open(Session& s, const std::vector<std::size_t>& indices) override {
    std::vector<std::pair<std::size_t, Opening>> o;
    for (auto i : indices) {
      o.emplace_back(i, honest_opening(i));
      const BitString c = proto::mask_commit(st_[i], xs_[i], r_[i]);
      if (auto y = solve_opening(alt_st_[i], c, r_[i], params_.k); y && *y != xs_[i]) {
        second_ = true;
        o.emplace_back(i, Opening{alt_chal_[i], *y, alt_st_e_[i], alt_p_e_[i]});
      }
    }
    send_openings(s, o);
  }

 protected:
  void before_handover(Session& s) override {
    for (std::size_t i = 0; i < params_.count; ++i) {
      alt_chal_.push_back(BitString::random(s.rng(self_), params_.n));
      alt_st_.push_back(fe_.rep(s.eval(self_, token_, alt_chal_.back()).response, p_[i]));
    }
  }
  void before_return(Session& s, Sid ext) override {
    for (std::size_t i = 0; i < params_.count; ++i) {
      auto [st_e, p_e] = ext_key(s, ext, alt_st_[i]);
      alt_st_e_.push_back(std::move(st_e));
      alt_p_e_.push_back(std::move(p_e));
    }
  }

 private:
  std::vector<BitString> alt_chal_, alt_st_, alt_st_e_;
  std::vector<fe::HelperData> alt_p_e_;
  bool second_ = false;
};

// ---- single-token protocol senders ----

class RandomDecommitCpuf : public proto::CpufCommitter, public Equivocator {
 public:
  using CpufCommitter::CpufCommitter;
  bool produced_second_opening() const override { return true; }
  void open(Session& s, const std::vector<std::size_t>&) override {
    send_opening(s, chal_, x_);
    send_opening(s, chal_, differing(s.rng(self_), x_));
  }
};

class EquivocatingCpuf : public proto::CpufCommitter, public Equivocator {
 public:
  using CpufCommitter::CpufCommitter;
  bool produced_second_opening() const override { return second_; }
  void open(Session& s, const std::vector<std::size_t>&) override {
    send_opening(s, chal_, x_);
    const BitString c = proto::mask_commit(st_, x_, r_);
    if (auto y = solve_opening(alt_st_, c, r_, params_.k); y && *y != x_) {
      second_ = true;
      send_opening(s, alt_chal_, *y);
    }
  }

 protected:
  void before_handover(Session& s) override {
    alt_chal_ = BitString::random(s.rng(self_), params_.n);
    alt_st_ = fe_.rep(s.eval(self_, token_, alt_chal_).response, p_);
  }

 private:
  BitString alt_chal_, alt_st_;
  bool second_ = false;
};

// ---- receivers ----

class RecordingTokenReceiver : public proto::CollVerifier, public Distinguisher {
 public:
  using CollVerifier::CollVerifier;
  bool guess(Session& s) override {
    const auto resp = s.eval(self_, returned_, BitString(params_.ext.puf.n, true));
    if (resp.ok() && c_.size() == params_.count) {
      const BitString st = resp.response.slice(0, params_.k * params_.n);
      if (auto x = extract::extract_from_query(st, c_[0], r_[0], params_.k)) return x->get(0);
    }
    return s.rng(self_).bit();
  }

 protected:
  Sid create_ext(Session& s) override {
    // second query is the sender's Enc(st) for string 0; the first is our own test query
    return s.create_malicious(self_, params_.ext.puf, recording_program(code_, 2, params_.ext.puf.rg));
  }
};

class AbortingTokenReceiver : public proto::CollVerifier {
 public:
  using CollVerifier::CollVerifier;

 protected:
  Sid create_ext(Session& s) override { return s.create_malicious(self_, params_.ext.puf, puf::aborting_program()); }
  bool test_query(Session&, Sid) override { return true; }
};

class OnesDistinguisher : public proto::CollVerifier, public Distinguisher {
 public:
  using CollVerifier::CollVerifier;
  bool guess(Session&) override {
    std::size_t ones = 0, total = 0;
    for (std::size_t p = 0; p < c_[0].size(); p += params_.k, ++total) ones += c_[0].get(p);
    return 2 * ones > total;
  }

 protected:
  BitString choose_r(Session&, std::size_t) override { return BitString(params_.k * params_.n, true); }
};

class ProbeDistinguisher : public proto::CollVerifier, public Distinguisher {
 public:
  using CollVerifier::CollVerifier;
  bool guess(Session& s) override {
    try {
      const auto resp = s.eval(self_, token_, BitString::random(s.rng(self_), params_.n));
      const BitString st = fe_.rep(resp.response, p_[0]);
      if (auto x = extract::extract_from_query(st, c_[0], r_[0], params_.k)) return x->get(0);
    } catch (const Error&) {
    }
    return s.rng(self_).bit();
  }
};

class CpufOnesDistinguisher : public proto::CpufVerifier, public Distinguisher {
 public:
  using CpufVerifier::CpufVerifier;
  bool guess(Session&) override {
    std::size_t ones = 0, total = 0;
    for (std::size_t p = 0; p < c_->size(); p += params_.k, ++total) ones += c_->get(p);
    return 2 * ones > total;
  }

 protected:
  BitString choose_r(Session&) override { return BitString(params_.k * 3 * params_.n, true); }
};

class CpufProbeDistinguisher : public proto::CpufVerifier, public Distinguisher {
 public:
  using CpufVerifier::CpufVerifier;
  bool guess(Session& s) override {
    try {
      const auto resp = s.eval(self_, token_, BitString::random(s.rng(self_), params_.n));
      const BitString st = fe_.rep(resp.response, *p_);
      if (auto x = extract::extract_from_query(st, *c_, r_, params_.k)) return x->get(0);
    } catch (const Error&) {
    }
    return s.rng(self_).bit();
  }
};

// ---- the earlier protocol ----

class DoubleQuerySender : public proto::OriginalCommitter {
 public:
  using OriginalCommitter::OriginalCommitter;

 protected:
  // the extra query that makes the two candidate openings indistinguishable to the extractor
  void after_commit_sent(Session& s) override { s.eval(self_, ext_, code_.encode(st1_ ^ r1_)); }
};

// ---- compiler-level sender ----

class EGuessingSender : public uc::UcSender {
 public:
  using UcSender::UcSender;

 protected:
  void choose_blobs(Session& s) override {
    Rng& rng = s.rng(Party::kP1);
    const std::size_t blobs = 2 * params_.pairs;
    blobs_.share0.assign(blobs, false);
    blobs_.share1.assign(blobs, false);
    for (std::size_t i = 0; i < params_.pairs; ++i) {
      const bool v = rng.bit();
      for (std::size_t j : {2 * i, 2 * i + 1}) {
        blobs_.share0[j] = rng.bit();
        blobs_.share1[j] = blobs_.share0[j] != (j == 2 * i ? v : !v);
      }
    }
  }
  std::vector<bool> compute_y(Session& s) override {
    std::vector<bool> y(params_.pairs);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const auto& sh = s.rng(Party::kP1).bit() ? blobs_.share1 : blobs_.share0;
      y[i] = sh[2 * i] != sh[2 * i + 1];
    }
    return y;
  }
  std::vector<std::size_t> decommit_blobs(Session&, bool b) override {
    std::vector<std::size_t> l(params_.pairs);
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = blobs_.blob(2 * i) == b ? 2 * i : 2 * i + 1;
    return l;
  }
};

[[noreturn]] void unconstructible(const std::string& id, const std::string& protocol, const std::string& why) {
  throw Error("UNCONSTRUCTIBLE", id + " against " + protocol + ": " + why);
}

bool is_honest(const std::string& id) { return id == "honest" || id == "honest-sender" || id == "honest-receiver"; }

}  // namespace

const std::vector<ZooMember>& zoo() {
  static const std::vector<ZooMember> members = {
      {"honest-sender", Role::kSender,
       {"cpuf", "extpuf", "extpuf-original", "collextpuf", "uccompiler", "uccompiler-compat"},
       "completeness", "follows the protocol"},
      {"honest-receiver", Role::kReceiver,
       {"cpuf", "extpuf", "extpuf-original", "collextpuf", "uccompiler", "uccompiler-compat"},
       "completeness", "follows the protocol"},
      {"double-query-sender", Role::kSender, {"extpuf-original"}, "extraction",
       "commits honestly, then also queries the second token on Enc(st1 xor r1)"},
      {"late-query-sender", Role::kSender, kTwoToken, "extraction",
       "the same extra query, attempted once r is known"},
      {"never-query-sender", Role::kSender, kTwoToken, "extraction",
       "never queries the second token and sends made-up second keys"},
      {"token-substituting-sender", Role::kSender, kTwoToken, "extraction",
       "keeps the second token and hands back a fresh one"},
      {"leaking-token-sender", Role::kSender, kTwoToken, "extraction",
       "sends a token that reports every query to its creator"},
      {"random-decommit-sender", Role::kSender, kBasic, "binding",
       "opens honestly and also to a random different string"},
      {"equivocating-sender", Role::kSender, kBasic, "binding",
       "prepares a second challenge and key, opens both when r allows"},
      {"recording-token-receiver", Role::kReceiver, kTwoToken, "hiding",
       "second token records the sender's query and replays it later"},
      {"aborting-token-receiver", Role::kReceiver, kTwoToken, "completeness",
       "second token never answers"},
      {"ones-distinguisher", Role::kReceiver, kBasic, "hiding", "sends r = 1...1 and guesses from c"},
      {"probe-distinguisher", Role::kReceiver, kBasic, "hiding",
       "reproduces a key from a random challenge and guesses from c"},
      {"e-guessing-sender", Role::kSender, {"uccompiler", "uccompiler-compat"}, "blobeq",
       "commits one blob of each value per pair and guesses e"},
  };
  return members;
}

const ZooMember& member(const std::string& id) {
  const std::string key = id == "honest" ? "honest-sender" : id;
  for (const auto& m : zoo())
    if (m.id == key) return m;
  throw Error("CONFIG", "unknown adversary '" + id + "'");
}

bool applies(const ZooMember& m, const std::string& protocol) {
  for (const auto& p : m.protocols)
    if (p == protocol) return true;
  return false;
}

std::unique_ptr<proto::MultiCommitter> make_cpuf_committer(const std::string& id, const proto::CpufParams& p,
                                                           BitString x) {
  const Party me = Party::kP1;
  if (is_honest(id)) return std::make_unique<proto::CpufCommitter>(me, "cpuf", p, std::move(x));
  if (id == "random-decommit-sender") return std::make_unique<RandomDecommitCpuf>(me, "cpuf", p, std::move(x));
  if (id == "equivocating-sender") return std::make_unique<EquivocatingCpuf>(me, "cpuf", p, std::move(x));
  unconstructible(id, "cpuf", "not a sender strategy for this protocol");
}

std::unique_ptr<proto::MultiVerifier> make_cpuf_verifier(const std::string& id, const proto::CpufParams& p) {
  const Party me = Party::kP2;
  if (is_honest(id)) return std::make_unique<proto::CpufVerifier>(me, "cpuf", p);
  if (id == "ones-distinguisher") return std::make_unique<CpufOnesDistinguisher>(me, "cpuf", p);
  if (id == "probe-distinguisher") return std::make_unique<CpufProbeDistinguisher>(me, "cpuf", p);
  unconstructible(id, "cpuf", "not a receiver strategy for this protocol");
}

std::unique_ptr<proto::MultiCommitter> make_coll_committer(const std::string& id, const proto::ExtPufParams& p,
                                                           std::vector<BitString> xs) {
  const Party me = Party::kP1;
  const std::string ch = "x";
  if (is_honest(id)) return std::make_unique<proto::CollCommitter>(me, ch, p, std::move(xs));
  if (id == "late-query-sender") return std::make_unique<LateQuerySender>(me, ch, p, std::move(xs));
  if (id == "never-query-sender") return std::make_unique<NeverQuerySender>(me, ch, p, std::move(xs));
  if (id == "token-substituting-sender") return std::make_unique<TokenSubstitutingSender>(me, ch, p, std::move(xs));
  if (id == "leaking-token-sender") return std::make_unique<LeakingTokenSender>(me, ch, p, std::move(xs));
  if (id == "random-decommit-sender") return std::make_unique<RandomDecommitSender>(me, ch, p, std::move(xs));
  if (id == "equivocating-sender") return std::make_unique<EquivocatingSender>(me, ch, p, std::move(xs));
  if (id == "double-query-sender") {
    unconstructible(id, "extpuf",
                    "the challenge r is sent only after the second token is back with its creator, so no "
                    "query to it can depend on r");
  }
  unconstructible(id, "extpuf", "not a sender strategy for this protocol");
}

std::unique_ptr<proto::MultiVerifier> make_coll_verifier(const std::string& id, const proto::ExtPufParams& p) {
  const Party me = Party::kP2;
  const std::string ch = "x";
  if (is_honest(id)) return std::make_unique<proto::CollVerifier>(me, ch, p);
  if (id == "recording-token-receiver") return std::make_unique<RecordingTokenReceiver>(me, ch, p);
  if (id == "aborting-token-receiver") return std::make_unique<AbortingTokenReceiver>(me, ch, p);
  if (id == "ones-distinguisher") return std::make_unique<OnesDistinguisher>(me, ch, p);
  if (id == "probe-distinguisher") return std::make_unique<ProbeDistinguisher>(me, ch, p);
  unconstructible(id, "extpuf", "not a receiver strategy for this protocol");
}

std::unique_ptr<proto::MultiCommitter> make_original_committer(const std::string& id,
                                                               const proto::OriginalExtPufParams& p, BitString x) {
  const Party me = Party::kP1;
  if (is_honest(id)) return std::make_unique<proto::OriginalCommitter>(me, "orig", p, std::move(x));
  if (id == "double-query-sender") return std::make_unique<DoubleQuerySender>(me, "orig", p, std::move(x));
  unconstructible(id, "extpuf-original", "not a sender strategy for this protocol");
}

std::unique_ptr<uc::UcSender> make_uc_sender(const std::string& id, const uc::UcParams& p, bool b) {
  if (is_honest(id)) return std::make_unique<uc::UcSender>(p, b);
  if (id == "e-guessing-sender") return std::make_unique<EGuessingSender>(p, b);
  unconstructible(id, "uccompiler", "not a sender strategy for this protocol");
}

std::shared_ptr<puf::PufProgram> recording_program(ecc::RepetitionCode code, std::size_t which, std::size_t rg) {
  const std::size_t logged = code.params().msg_len;
  return puf::make_program(
      "recording", 8 + logged,
      [code, which, rg, logged](puf::InputKind kind, const BitString& q, BitString& state,
                                const puf::InnerOracle& inner) {
        puf::MachineOutput out;
        if (kind != puf::InputKind::kQuery) return out;
        if (state.empty()) state = BitString(8 + logged);
        if (q.popcount() == q.size()) {
          BitString reply(rg);
          const BitString rec = state.slice(8, logged);
          for (std::size_t i = 0; i < std::min(rg, logged); ++i) reply.set(i, rec.get(i));
          out.response = reply;
          return out;
        }
        const std::uint64_t count = state.slice(0, 8).to_uint() + 1;
        BitString next = BitString::from_uint(std::min<std::uint64_t>(count, 255), 8);
        next.append(count == which ? code.decode(q) : state.slice(8, logged));
        state = next;
        out.response = inner(q);
        return out;
      });
}

}  // namespace pufcom::adv
