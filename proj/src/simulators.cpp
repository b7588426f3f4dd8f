#include "pufcom/simulators.hpp"

#include "pufcom/error.hpp"
#include "pufcom/extractors.hpp"

namespace pufcom::sim {

SimulatedSender::SimulatedSender(uc::UcParams params) : uc::UcSender(std::move(params), std::nullopt) {
  if (!e_coll_) throw Error("CONFIG", "simulation needs the collective backend");
}

void SimulatedSender::on_e_committed(Session& s) {
  const auto got = extract::extract(s.functionality(), e_coll_->view(), params_.e_params.code());
  if (got.size() == 1 && got[0]) {
    std::vector<bool> e(params_.pairs);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = got[0]->get(i);
    e_star_ = std::move(e);
  }
}

void SimulatedSender::choose_blobs(Session& s) {
  Rng& rng = s.rng(Party::kP1);
  const std::size_t blobs = 2 * params_.pairs;
  blobs_.share0.assign(blobs, false);
  blobs_.share1.assign(blobs, false);
  blob_for_zero_.resize(params_.pairs);
  blob_for_one_.resize(params_.pairs);
  for (std::size_t i = 0; i < params_.pairs; ++i) {
    const std::size_t o = rng.bit() ? 1 : 0;
    blob_for_zero_[i] = 2 * i + o;
    blob_for_one_[i] = 2 * i + 1 - o;
  }
  for (std::size_t i = 0; i < params_.pairs; ++i) {
    for (std::size_t j : {2 * i, 2 * i + 1}) {
      const bool v = j == blob_for_one_[i];
      blobs_.share0[j] = rng.bit();
      blobs_.share1[j] = blobs_.share0[j] != v;
    }
  }
}

std::vector<bool> SimulatedSender::compute_y(Session& s) {
  std::vector<bool> y(params_.pairs);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (e_star_) {
      const auto& sh = (*e_star_)[i] ? blobs_.share1 : blobs_.share0;
      y[i] = sh[2 * i] != sh[2 * i + 1];
    } else {
      y[i] = s.rng(Party::kP1).bit();
    }
  }
  return y;
}

bool SimulatedSender::accept_e(Session&, const std::vector<bool>& e) { return e_star_ && e == *e_star_; }

std::vector<std::size_t> SimulatedSender::decommit_blobs(Session&, bool b) {
  return b ? blob_for_one_ : blob_for_zero_;
}

SimulatedReceiver::SimulatedReceiver(uc::UcParams params, func::CommitFunctionality& ideal)
    : uc::UcReceiver(std::move(params)), ideal_(ideal) {
  if (!blob_coll_) throw Error("CONFIG", "simulation needs the collective backend");
}

void SimulatedReceiver::on_blobs_committed(Session& s) {
  const auto got = extract::extract(s.functionality(), blob_coll_->view(), params_.blob_params.code());
  blob_star_.assign(2 * params_.pairs, std::nullopt);
  for (std::size_t j = 0; j < blob_star_.size(); ++j) {
    const auto& a = got.at(uc::share_index(j, false));
    const auto& b = got.at(uc::share_index(j, true));
    if (a && b) blob_star_[j] = a->get(0) != b->get(0);
  }
}

bool SimulatedReceiver::on_commit_done(Session&) {
  // Values common to every pair; bit 0 = "0", bit 1 = "1", bit 2 = no value.
  unsigned common = 7;
  for (std::size_t i = 0; i < params_.pairs; ++i) {
    unsigned pair = 0;
    for (std::size_t j : {2 * i, 2 * i + 1}) pair |= blob_star_[j] ? (*blob_star_[j] ? 2U : 1U) : 4U;
    common &= pair;
  }
  common &= 3U;
  if (common == 3U) {
    sim_abort_ = true;
    return false;
  }
  b_star_ = common == 2U;
  ideal_.commit(Party::kP1, BitString(1, *b_star_));
  return true;
}

std::optional<bool> SimulatedReceiver::on_decommit(Session&, bool b) {
  if (!b_star_ || b != *b_star_) {
    sim_abort_ = true;
    return std::nullopt;
  }
  for (const auto& note : ideal_.open(Party::kP1)) {
    if (note.to == Party::kP2 && note.value) delivered_ = note.value->get(0);
  }
  return delivered_;
}

uc::UcOutcome SimulatedReceiver::outcome() const {
  uc::UcOutcome o = uc::UcReceiver::outcome();
  o.bit = delivered_;
  o.decided = delivered_.has_value();
  return o;
}

}  // namespace pufcom::sim
