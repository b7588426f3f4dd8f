#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pufcom/protocols.hpp"

namespace pufcom::uc {

using proto::Event;
using proto::Party;
using proto::Session;

enum class Backend { kCollective, kPerString };

struct UcParams {
  std::size_t pairs = 16;  // number of blob pairs; also the length of the challenge e
  Backend backend = Backend::kCollective;
  proto::ExtPufParams e_params;     // one string of `pairs` bits
  proto::ExtPufParams blob_params;  // 4*pairs strings of one bit
};
UcParams make_uc_params(std::size_t pairs, std::size_t n, Backend backend, std::size_t d_noise = 5);

// Blob j (0-based, 2*pairs of them) is the share pair (share0[j], share1[j]);
// pair i groups blobs 2i and 2i+1. Commitment index of share v of blob j is 2j+v.
struct BlobState {
  std::vector<bool> share0, share1;
  std::vector<bool> y;
  bool blob(std::size_t j) const { return share0[j] != share1[j]; }
};
inline std::size_t share_index(std::size_t blob, bool v) { return 2 * blob + (v ? 1 : 0); }

// Receiver's check after e is revealed: y_i equals the xor of the e_i-shares of both blobs in pair i.
bool blob_equalities_check(const BlobState& st, const std::vector<bool>& e);
std::vector<bool> honest_y(const BlobState& st);

struct UcOutcome {
  bool committed = false;
  bool decided = false;
  std::optional<bool> bit;
  std::string abort_step;  // empty unless the run stopped early
};

class UcSender : public proto::Endpoint {
 public:
  UcSender(UcParams params, std::optional<bool> b);
  void on_event(Session& s, const Event& ev) override;
  const std::string& abort_step() const { return abort_; }
  const BlobState& blobs() const { return blobs_; }

 protected:
  virtual void choose_blobs(Session& s);
  virtual std::vector<bool> compute_y(Session& s);
  virtual bool accept_e(Session&, const std::vector<bool>&) { return true; }
  virtual void on_e_committed(Session&) {}
  // Blob to open in each pair when decommitting to b.
  virtual std::vector<std::size_t> decommit_blobs(Session& s, bool b);
  void abort(Session& s, std::string step);

  UcParams params_;
  std::optional<bool> b_;
  BlobState blobs_;
  std::unique_ptr<proto::MultiVerifier> e_ver_;
  proto::CollVerifier* e_coll_ = nullptr;  // set for the collective backend
  std::unique_ptr<proto::MultiCommitter> blob_com_;
  bool y_sent_ = false, e_seen_ = false;
  std::string abort_;
};

class UcReceiver : public proto::Endpoint {
 public:
  explicit UcReceiver(UcParams params);
  void on_event(Session& s, const Event& ev) override;
  virtual UcOutcome outcome() const;
  const std::vector<bool>& y() const { return y_; }
  const std::vector<bool>& e() const { return e_; }

 protected:
  virtual void on_blobs_committed(Session&) {}
  // Called once BlobEqualities passed; false aborts.
  virtual bool on_commit_done(Session&) { return true; }
  // Called with the opened bit; returns the bit to output or nothing to abort.
  virtual std::optional<bool> on_decommit(Session&, bool b) { return b; }
  void abort(Session& s, std::string step);
  void handle_verdicts(Session& s);

  UcParams params_;
  std::vector<bool> e_, y_;
  std::unique_ptr<proto::MultiCommitter> e_com_;
  std::unique_ptr<proto::MultiVerifier> blob_ver_;
  proto::CollVerifier* blob_coll_ = nullptr;
  bool blobs_started_ = false, e_opened_ = false, y_received_ = false, committed_ = false;
  std::optional<bool> bit_;
  bool decided_ = false;
  std::map<std::size_t, bool> blobeq_shares_, open_shares_;
  std::string abort_;
};

}  // namespace pufcom::uc
