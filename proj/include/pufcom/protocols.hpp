#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pufcom/ecc.hpp"
#include "pufcom/fuzzyext.hpp"
#include "pufcom/session.hpp"

namespace pufcom::proto {

struct TokenFamily {
  puf::PufParams puf;
  fe::FeParams fe;
};

// Token family with a matching extractor that yields out_len-bit keys.
TokenFamily make_family(std::size_t challenge_len, std::size_t out_len, std::size_t d_noise, std::size_t d_min);

struct CpufParams {
  std::size_t n = 32;
  std::size_t k = 4;
  TokenFamily token;  // keys of k*3n bits
};
CpufParams make_cpuf_params(std::size_t n, std::size_t k, std::size_t d_noise = 5);

// Parameters shared by the single-string and the collective protocol.
struct ExtPufParams {
  std::size_t n = 32;
  std::size_t k = 4;
  std::size_t count = 1;   // number of committed strings
  std::size_t ext_d_min = 2;
  TokenFamily token;       // challenges of n bits, keys of k*n bits
  TokenFamily ext;         // challenges of k*n*(2*ext_d_min-1) bits
  ecc::RepetitionCode code() const { return ecc::code_for_min_distance(k * n, ext_d_min); }
};
ExtPufParams make_extpuf_params(std::size_t n, std::size_t k, std::size_t count, std::size_t d_noise = 5,
                                std::size_t ext_out = 0, std::size_t ext_d_min = 2);

// The earlier three-token construction, replayed for the attack.
struct OriginalExtPufParams {
  std::size_t n = 16;
  std::size_t k = 1;
  std::size_t ext_d_min = 2;
  bool literal_second_check = false;  // re-evaluate the first token when checking the second key
  TokenFamily first;   // keys of k*l bits, l = 3n
  TokenFamily second;  // keys of m*l bits, m = |st_E| + |p_E|
  TokenFamily ext;     // challenges of k*l*(2*ext_d_min-1) bits
  std::size_t l() const { return 3 * n; }
  ecc::RepetitionCode code() const { return ecc::code_for_min_distance(k * l(), ext_d_min); }
};
OriginalExtPufParams make_original_params(std::size_t n, std::size_t k, std::size_t d_noise = 3,
                                          std::size_t ext_out = 4, std::size_t ext_d_min = 2);

// st XOR (x repeated AND r): position p of the mask carries x[p mod |x|].
BitString mask_commit(const BitString& st, const BitString& x, const BitString& r);

BitString encode_index(std::size_t i);
std::size_t decode_index(const BitString& b);

struct Verdict {
  std::size_t index = 0;
  BitString value;
  bool accepted = false;
  std::string reason;
};

// What the verifier knows at the end of the commit phase; the extractors work from it.
struct CommitView {
  bool complete = false;
  Sid ext_sid = 0;
  Party committer = Party::kP1;
  std::size_t k = 0;
  std::vector<BitString> c, r;
  std::size_t commit_end_step = 0;  // functionality log length when the commitment arrived
};

class MultiCommitter {
 public:
  virtual ~MultiCommitter() = default;
  virtual void begin(Session& s) = 0;
  virtual void on_event(Session& s, const Event& ev) = 0;
  virtual bool committed() const = 0;
  virtual void open(Session& s, const std::vector<std::size_t>& indices) = 0;
  virtual std::size_t count() const = 0;
};

class MultiVerifier {
 public:
  virtual ~MultiVerifier() = default;
  virtual void begin(Session& s) = 0;
  virtual void on_event(Session& s, const Event& ev) = 0;
  virtual bool committed() const = 0;
  const std::optional<std::string>& failure() const { return failure_; }
  const std::vector<Verdict>& verdicts() const { return verdicts_; }
  std::vector<Verdict> take_verdicts();

 protected:
  std::optional<std::string> failure_;
  std::vector<Verdict> verdicts_;
  std::size_t taken_ = 0;
};

// ---- single-token commitment ----

class CpufCommitter : public MultiCommitter {
 public:
  CpufCommitter(Party self, std::string channel, CpufParams params, BitString x);
  void begin(Session& s) override;
  void on_event(Session& s, const Event& ev) override;
  bool committed() const override { return committed_; }
  void open(Session& s, const std::vector<std::size_t>& indices) override;
  std::size_t count() const override { return 1; }

 protected:
  virtual Sid create_token(Session& s);
  virtual void before_handover(Session&) {}
  void send_opening(Session& s, const BitString& chal, const BitString& x);

  Party self_;
  std::string channel_;
  CpufParams params_;
  fe::FuzzyExtractor fe_;
  BitString x_, chal_, st_, r_;
  fe::HelperData p_;
  Sid token_ = 0;
  bool committed_ = false;
};

class CpufVerifier : public MultiVerifier {
 public:
  CpufVerifier(Party self, std::string channel, CpufParams params);
  void begin(Session&) override {}
  void on_event(Session& s, const Event& ev) override;
  bool committed() const override { return c_.has_value(); }
  CommitView view() const;

 protected:
  virtual BitString choose_r(Session& s);

  Party self_;
  std::string channel_;
  CpufParams params_;
  fe::FuzzyExtractor fe_;
  Sid token_ = 0;
  std::optional<fe::HelperData> p_;
  BitString r_;
  bool r_sent_ = false;
  std::optional<BitString> c_;
};

// ---- the two-token protocol, for one or many strings ----

class CollCommitter : public MultiCommitter {
 public:
  struct Opening {
    BitString chal, x, st_e;
    fe::HelperData p_e;
  };

  CollCommitter(Party self, std::string channel, ExtPufParams params, std::vector<BitString> xs);
  void begin(Session& s) override;
  void on_event(Session& s, const Event& ev) override;
  bool committed() const override { return committed_; }
  void open(Session& s, const std::vector<std::size_t>& indices) override;
  std::size_t count() const override { return params_.count; }

  Opening honest_opening(std::size_t i) const;
  void send_openings(Session& s, const std::vector<std::pair<std::size_t, Opening>>& openings);

 protected:
  virtual Sid create_token(Session& s);
  virtual void handle_ext(Session& s, Sid ext);
  virtual void before_handover(Session&) {}
  virtual void before_return(Session&, Sid) {}
  virtual void after_commit_sent(Session&) {}
  // Evaluate the second token on Enc(key) and extract; zeros if it aborts.
  std::pair<BitString, fe::HelperData> ext_key(Session& s, Sid ext, const BitString& key);

  Party self_;
  std::string channel_;
  ExtPufParams params_;
  fe::FuzzyExtractor fe_, fe_e_;
  ecc::RepetitionCode code_;
  std::vector<BitString> xs_, chal_, st_, st_e_, r_;
  std::vector<fe::HelperData> p_, p_e_;
  Sid token_ = 0, ext_ = 0;
  bool committed_ = false;
};

class CollVerifier : public MultiVerifier {
 public:
  CollVerifier(Party self, std::string channel, ExtPufParams params);
  void begin(Session& s) override;
  void on_event(Session& s, const Event& ev) override;
  bool committed() const override { return committed_; }
  CommitView view() const;
  const ExtPufParams& params() const { return params_; }

 protected:
  virtual Sid create_ext(Session& s);
  virtual bool test_query(Session& s, Sid returned);
  virtual BitString choose_r(Session& s, std::size_t i);
  virtual void on_committed(Session&) {}
  Verdict check_opening(Session& s, std::size_t i, const BitString& chal, const BitString& x,
                        const BitString& st_e, const BitString& p_e_bits);
  void fail(Session& s, std::string why);

  Party self_;
  std::string channel_;
  ExtPufParams params_;
  fe::FuzzyExtractor fe_, fe_e_;
  ecc::RepetitionCode code_;
  Sid ext_ = 0, returned_ = 0, token_ = 0;
  std::size_t arrivals_ = 0;
  BitString tq_chal_, tq_key_;
  fe::HelperData tq_p_;
  std::vector<fe::HelperData> p_;
  std::vector<BitString> r_, c_;
  bool r_sent_ = false, committed_ = false;
  std::size_t commit_end_step_ = 0;
};

// One independent two-token session per string, run one after another.
class PerStringCommitter : public MultiCommitter {
 public:
  PerStringCommitter(Party self, std::string prefix, ExtPufParams single, std::vector<BitString> xs);
  void begin(Session& s) override;
  void on_event(Session& s, const Event& ev) override;
  bool committed() const override;
  void open(Session& s, const std::vector<std::size_t>& indices) override;
  std::size_t count() const override { return subs_.size(); }

 private:
  void start_upto(Session& s, std::size_t i);

  Party self_;
  std::string prefix_;
  std::vector<std::unique_ptr<CollCommitter>> subs_;
  std::size_t started_ = 0;
};

class PerStringVerifier : public MultiVerifier {
 public:
  PerStringVerifier(Party self, std::string prefix, ExtPufParams single, std::size_t count);
  void begin(Session& s) override;
  void on_event(Session& s, const Event& ev) override;
  bool committed() const override;

 private:
  std::string prefix_;
  std::vector<std::unique_ptr<CollVerifier>> subs_;
  std::size_t started_ = 0;
};

// ---- the earlier three-token protocol ----

class OriginalCommitter : public MultiCommitter {
 public:
  OriginalCommitter(Party self, std::string channel, OriginalExtPufParams params, BitString x);
  void begin(Session& s) override;
  void on_event(Session& s, const Event& ev) override;
  bool committed() const override { return committed_; }
  void open(Session& s, const std::vector<std::size_t>& indices) override;
  std::size_t count() const override { return 1; }

 protected:
  virtual void after_commit_sent(Session&) {}

  Party self_;
  std::string channel_;
  OriginalExtPufParams params_;
  fe::FuzzyExtractor fe1_, fe2_, fe_e_;
  ecc::RepetitionCode code_;
  BitString x_, chal1_, chal2_, st1_, st2_, st_e_, r1_, r2_;
  fe::HelperData p1_, p2_, p_e_;
  Sid first_ = 0, second_ = 0, ext_ = 0;
  bool committed_ = false;
};

class OriginalVerifier : public MultiVerifier {
 public:
  OriginalVerifier(Party self, std::string channel, OriginalExtPufParams params);
  void begin(Session& s) override;
  void on_event(Session& s, const Event& ev) override;
  bool committed() const override { return committed_; }
  CommitView view() const;

 private:
  void try_verify(Session& s);

  Party self_;
  std::string channel_;
  OriginalExtPufParams params_;
  fe::FuzzyExtractor fe1_, fe2_, fe_e_;
  ecc::RepetitionCode code_;
  Sid ext_ = 0, first_ = 0, second_ = 0, returned_ = 0;
  std::size_t arrivals_ = 0;
  BitString tq_chal_, tq_key_;
  fe::HelperData tq_p_;
  std::optional<fe::HelperData> p1_, p2_;
  BitString r1_, r2_, c1_, c2_;
  bool committed_ = false;
  std::optional<Message> pending_open_;
  std::size_t commit_end_step_ = 0;
};

// Session endpoints that drive a committer or verifier on their own:
// a start event begins the commit, an "open" command opens everything.
class CommitterParty : public Endpoint {
 public:
  explicit CommitterParty(MultiCommitter& c) : c_(c) {}
  void on_event(Session& s, const Event& ev) override;

 private:
  MultiCommitter& c_;
};

class VerifierParty : public Endpoint {
 public:
  explicit VerifierParty(MultiVerifier& v) : v_(v) {}
  void on_event(Session& s, const Event& ev) override;

 private:
  MultiVerifier& v_;
};

}  // namespace pufcom::proto
