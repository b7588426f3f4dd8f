#include "pufcom/uccompiler.hpp"

#include "pufcom/error.hpp"

namespace pufcom::uc {

namespace {

bool on_channel(const std::string& ch, const std::string& prefix) {
  return ch == prefix || (ch.size() > prefix.size() && ch.compare(0, prefix.size(), prefix) == 0 &&
                          ch[prefix.size()] == '.');
}

BitString bits_of(const std::vector<bool>& v) {
  BitString b(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) b.set(i, v[i]);
  return b;
}

std::vector<bool> vec_of(const BitString& b) {
  std::vector<bool> v(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) v[i] = b.get(i);
  return v;
}

}  // namespace

UcParams make_uc_params(std::size_t pairs, std::size_t n, Backend backend, std::size_t d_noise) {
  if (pairs == 0) throw Error("CONFIG", "pairs must be positive");
  UcParams p;
  p.pairs = pairs;
  p.backend = backend;
  p.e_params = proto::make_extpuf_params(n, pairs, 1, d_noise);
  p.blob_params = proto::make_extpuf_params(n, 1, 4 * pairs, d_noise);
  return p;
}

bool blob_equalities_check(const BlobState& st, const std::vector<bool>& e) {
  if (e.size() != st.y.size() || st.share0.size() != 2 * e.size()) throw Error("LEN_MISMATCH", "blob state");
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto& sh = e[i] ? st.share1 : st.share0;
    if (st.y[i] != (sh[2 * i] != sh[2 * i + 1])) return false;
  }
  return true;
}

std::vector<bool> honest_y(const BlobState& st) {
  std::vector<bool> y(st.share0.size() / 2);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = st.share0[2 * i] != st.share0[2 * i + 1];
  return y;
}

// ---- sender ----

UcSender::UcSender(UcParams params, std::optional<bool> b) : params_(std::move(params)), b_(b) {
  const Party self = Party::kP1;
  if (params_.backend == Backend::kCollective) {
    auto v = std::make_unique<proto::CollVerifier>(self, "e", params_.e_params);
    e_coll_ = v.get();
    e_ver_ = std::move(v);
  } else {
    e_ver_ = std::make_unique<proto::PerStringVerifier>(self, "e", params_.e_params, 1);
  }
}

void UcSender::abort(Session& s, std::string step) {
  if (!abort_.empty()) return;
  s.note(Party::kP1, "abort: " + step);
  abort_ = std::move(step);
}

void UcSender::choose_blobs(Session& s) {
  const std::size_t blobs = 2 * params_.pairs;
  blobs_.share0.resize(blobs);
  blobs_.share1.resize(blobs);
  for (std::size_t j = 0; j < blobs; ++j) {
    blobs_.share0[j] = s.rng(Party::kP1).bit();
    blobs_.share1[j] = blobs_.share0[j] != *b_;
  }
}

std::vector<bool> UcSender::compute_y(Session&) { return honest_y(blobs_); }

std::vector<std::size_t> UcSender::decommit_blobs(Session& s, bool) {
  std::vector<std::size_t> l(params_.pairs);
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = 2 * i + (s.rng(Party::kP1).bit() ? 1 : 0);
  return l;
}

void UcSender::on_event(Session& s, const Event& ev) {
  if (!abort_.empty()) return;
  if (ev.kind == Event::Kind::kStart && ev.channel.empty()) {
    e_ver_->begin(s);
    return;
  }
  if (ev.kind == Event::Kind::kCommand && ev.message.name == "open") {
    if (ev.message.has("b")) b_ = ev.message.at("b").get(0);
    if (!b_ || !blob_com_) return abort(s, "open-unready");
    std::vector<std::size_t> idx;
    for (auto j : decommit_blobs(s, *b_)) {
      idx.push_back(share_index(j, false));
      idx.push_back(share_index(j, true));
    }
    blob_com_->open(s, idx);
    return;
  }
  if (on_channel(ev.channel, "e")) {
    const bool was = e_ver_->committed();
    e_ver_->on_event(s, ev);
    if (e_ver_->failure()) return abort(s, "e-commit");
    if (!was && e_ver_->committed()) {
      on_e_committed(s);
      choose_blobs(s);
      std::vector<BitString> xs;
      for (std::size_t j = 0; j < blobs_.share0.size(); ++j) {
        xs.push_back(BitString(1, blobs_.share0[j]));
        xs.push_back(BitString(1, blobs_.share1[j]));
      }
      if (params_.backend == Backend::kCollective) {
        blob_com_ = std::make_unique<proto::CollCommitter>(Party::kP1, "b", params_.blob_params, xs);
      } else {
        blob_com_ = std::make_unique<proto::PerStringCommitter>(Party::kP1, "b", params_.blob_params, xs);
      }
      blob_com_->begin(s);
    }
    for (const auto& v : e_ver_->take_verdicts()) {
      if (e_seen_) continue;
      e_seen_ = true;
      if (!v.accepted || v.value.size() != params_.pairs) return abort(s, "e-open");
      const auto e = vec_of(v.value);
      if (!accept_e(s, e)) return abort(s, "e-mismatch");
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < params_.pairs; ++i) {
        idx.push_back(share_index(2 * i, e[i]));
        idx.push_back(share_index(2 * i + 1, e[i]));
      }
      blob_com_->open(s, idx);
    }
    return;
  }
  if (on_channel(ev.channel, "b") && blob_com_) {
    blob_com_->on_event(s, ev);
    if (blob_com_->committed() && !y_sent_) {
      y_sent_ = true;
      blobs_.y = compute_y(s);
      s.send(Party::kP1, proto::Message{"uc", "y", {}}.add("y", bits_of(blobs_.y)));
    }
  }
}

// ---- receiver ----

UcReceiver::UcReceiver(UcParams params) : params_(std::move(params)) {
  const Party self = Party::kP2;
  if (params_.backend == Backend::kCollective) {
    auto v = std::make_unique<proto::CollVerifier>(self, "b", params_.blob_params);
    blob_coll_ = v.get();
    blob_ver_ = std::move(v);
  } else {
    blob_ver_ = std::make_unique<proto::PerStringVerifier>(self, "b", params_.blob_params, 4 * params_.pairs);
  }
}

void UcReceiver::abort(Session& s, std::string step) {
  if (!abort_.empty()) return;
  s.note(Party::kP2, "abort: " + step);
  abort_ = std::move(step);
}

void UcReceiver::on_event(Session& s, const Event& ev) {
  if (!abort_.empty() || decided_) return;
  if (ev.kind == Event::Kind::kStart && ev.channel.empty()) {
    e_.resize(params_.pairs);
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] = s.rng(Party::kP2).bit();
    if (params_.backend == Backend::kCollective) {
      e_com_ = std::make_unique<proto::CollCommitter>(Party::kP2, "e", params_.e_params, std::vector{bits_of(e_)});
    } else {
      e_com_ = std::make_unique<proto::PerStringCommitter>(Party::kP2, "e", params_.e_params,
                                                           std::vector{bits_of(e_)});
    }
    e_com_->begin(s);
    return;
  }
  if (ev.kind == Event::Kind::kStart && ev.channel == "uc.blobs") {
    blobs_started_ = true;
    blob_ver_->begin(s);
    return;
  }
  if (on_channel(ev.channel, "e") && e_com_) {
    const bool was = e_com_->committed();
    e_com_->on_event(s, ev);
    if (!was && e_com_->committed()) {
      Event next;
      next.kind = Event::Kind::kStart;
      next.channel = "uc.blobs";
      s.defer(Party::kP2, std::move(next));
    }
    return;
  }
  if (ev.kind == Event::Kind::kMessage && ev.channel == "uc" && ev.message.name == "y" && !y_received_) {
    try {
      y_ = vec_of(ev.message.at("y"));
    } catch (const Error&) {
      return abort(s, "blobeq");
    }
    if (y_.size() != params_.pairs) return abort(s, "blobeq");
    y_received_ = true;
  } else if (on_channel(ev.channel, "b") && blobs_started_) {
    const bool was = blob_ver_->committed();
    blob_ver_->on_event(s, ev);
    if (blob_ver_->failure()) return abort(s, "blob-commit");
    if (!was && blob_ver_->committed()) on_blobs_committed(s);
    handle_verdicts(s);
    if (!abort_.empty() || decided_) return;
  }
  if (blob_ver_->committed() && y_received_ && !e_opened_) {
    e_opened_ = true;
    e_com_->open(s, {0});
  }
}

void UcReceiver::handle_verdicts(Session& s) {
  for (const auto& v : blob_ver_->take_verdicts()) {
    if (!v.accepted || v.value.size() != 1) return abort(s, committed_ ? "decommit" : "blobeq");
    (committed_ ? open_shares_ : blobeq_shares_)[v.index] = v.value.get(0);
  }
  const std::size_t expect = 2 * params_.pairs;
  if (!committed_ && blobeq_shares_.size() >= expect) {
    BlobState st;
    st.share0.assign(2 * params_.pairs, false);
    st.share1.assign(2 * params_.pairs, false);
    st.y = y_;
    for (std::size_t i = 0; i < params_.pairs; ++i) {
      for (std::size_t j : {2 * i, 2 * i + 1}) {
        auto it = blobeq_shares_.find(share_index(j, e_[i]));
        if (it == blobeq_shares_.end()) return abort(s, "blobeq");
        (e_[i] ? st.share1 : st.share0)[j] = it->second;
      }
    }
    if (!blob_equalities_check(st, e_)) return abort(s, "blobeq");
    committed_ = true;
    if (!on_commit_done(s)) return abort(s, "sim-abort");
    return;
  }
  if (committed_ && open_shares_.size() >= expect) {
    std::optional<bool> b;
    for (std::size_t i = 0; i < params_.pairs; ++i) {
      bool found = false;
      for (std::size_t j : {2 * i, 2 * i + 1}) {
        auto a = open_shares_.find(share_index(j, false));
        auto c = open_shares_.find(share_index(j, true));
        if (a == open_shares_.end() || c == open_shares_.end()) continue;
        const bool v = a->second != c->second;
        if (b && *b != v) return abort(s, "decommit");
        b = v;
        found = true;
      }
      if (!found) return abort(s, "decommit");
    }
    const auto out = on_decommit(s, *b);
    if (!out) return abort(s, "sim-abort");
    bit_ = out;
    decided_ = true;
  }
}

UcOutcome UcReceiver::outcome() const {
  UcOutcome o;
  o.committed = committed_;
  o.decided = decided_;
  o.bit = bit_;
  o.abort_step = abort_;
  return o;
}

}  // namespace pufcom::uc
