#pragma once

#include <optional>
#include <vector>

#include "pufcom/functionality.hpp"
#include "pufcom/uccompiler.hpp"

namespace pufcom::sim {

using proto::Party;
using proto::Session;

// Plays the sender against a corrupted receiver without knowing the bit until
// the opening: learns e early by extraction and commits one blob of each value per pair.
class SimulatedSender : public uc::UcSender {
 public:
  explicit SimulatedSender(uc::UcParams params);
  const std::optional<std::vector<bool>>& extracted_e() const { return e_star_; }

 protected:
  void on_e_committed(Session& s) override;
  void choose_blobs(Session& s) override;
  std::vector<bool> compute_y(Session& s) override;
  bool accept_e(Session& s, const std::vector<bool>& e) override;
  std::vector<std::size_t> decommit_blobs(Session& s, bool b) override;

 private:
  std::optional<std::vector<bool>> e_star_;
  std::vector<std::size_t> blob_for_zero_, blob_for_one_;
};

// Plays the receiver against a corrupted sender, extracts the committed bit
// from the blob commitments and relays it through the ideal commitment.
class SimulatedReceiver : public uc::UcReceiver {
 public:
  SimulatedReceiver(uc::UcParams params, func::CommitFunctionality& ideal);
  uc::UcOutcome outcome() const override;
  const std::optional<bool>& extracted_bit() const { return b_star_; }
  bool simulator_aborted() const { return sim_abort_; }

 protected:
  void on_blobs_committed(Session& s) override;
  bool on_commit_done(Session& s) override;
  std::optional<bool> on_decommit(Session& s, bool b) override;

 private:
  func::CommitFunctionality& ideal_;
  std::vector<std::optional<bool>> blob_star_;
  std::optional<bool> b_star_;
  std::optional<bool> delivered_;
  bool sim_abort_ = false;
};

}  // namespace pufcom::sim
