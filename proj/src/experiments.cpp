#include <sodium.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "pufcom/adversaries.hpp"
#include "pufcom/bitlab.hpp"
#include "pufcom/error.hpp"
#include "pufcom/extractors.hpp"
#include "pufcom/harness.hpp"
#include "pufcom/simulators.hpp"

namespace pufcom::harness {

using proto::Event;
using proto::Party;
using proto::Session;

namespace {

// ---------------------------------------------------------------- trial loop

struct TrialResult {
  enum class Outcome : std::uint8_t { kSuccess, kFailure, kAbort };
  Outcome outcome = Outcome::kFailure;
  std::string abort_step;
  ResourceCounters res;
  std::map<std::string, double> metrics;
  std::string log;  // serialized event logs of the trial

  void success() { outcome = Outcome::kSuccess; }
  void failure() { outcome = Outcome::kFailure; }
  void abort(std::string step) {
    outcome = Outcome::kAbort;
    abort_step = std::move(step);
  }
  void add(const std::string& key, double v = 1) { metrics[key] += v; }
};

using Digest = std::array<unsigned char, 16>;

Digest digest_of(const std::string& s) {
  Digest d{};
  crypto_generichash(d.data(), d.size(), reinterpret_cast<const unsigned char*>(s.data()), s.size(), nullptr, 0);
  return d;
}

std::string hex(const unsigned char* p, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += digits[p[i] >> 4];
    out += digits[p[i] & 15];
  }
  return out;
}

using TrialFn = std::function<TrialResult(std::uint64_t index, std::uint64_t seed)>;

// Runs trials on a thread pool; results are reduced in trial order, so the
// report does not depend on scheduling.
void run_trials(const ExperimentConfig& cfg, std::uint64_t trials, const TrialFn& fn, ExperimentReport& r) {
  if (sodium_init() < 0) throw Error("INTERNAL", "libsodium init failed");
  std::vector<TrialResult> results(trials);
  std::vector<Digest> digests(trials);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t t = next++;
      if (t >= trials) return;
      try {
        TrialResult tr = fn(t, mix_seed(cfg.seed, t));
        digests[t] = digest_of(tr.log);
        if (!cfg.log_dir.empty()) {
          std::ofstream out(std::filesystem::path(cfg.log_dir) / (cfg.name + "-" + std::to_string(t) + ".jsonl"));
          out << tr.log;
        }
        tr.log.clear();
        results[t] = std::move(tr);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = trials;
      }
    }
  };
  if (!cfg.log_dir.empty()) std::filesystem::create_directories(cfg.log_dir);
  unsigned threads = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  r.trials += trials;
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 16);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto& tr = results[t];
    switch (tr.outcome) {
      case TrialResult::Outcome::kSuccess: ++r.successes; break;
      case TrialResult::Outcome::kFailure: ++r.failures; break;
      case TrialResult::Outcome::kAbort: ++r.aborts[tr.abort_step]; break;
    }
    r.resources += tr.res;
    for (const auto& [k, v] : tr.metrics) r.metrics[k] += v;
    crypto_generichash_update(&st, digests[t].data(), digests[t].size());
  }
  Digest d{};
  crypto_generichash_final(&st, d.data(), d.size());
  r.digest = hex(d.data(), d.size());
}

double metric(const ExperimentReport& r, const std::string& key) {
  auto it = r.metrics.find(key);
  return it == r.metrics.end() ? 0.0 : it->second;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ------------------------------------------------------------- commitments

std::unique_ptr<func::PufFunctionality> functionality_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  func::CommBudget b;
  b.k_state = cfg.k_state;
  b.k_in = cfg.k_in;
  b.k_out = cfg.k_out;
  return std::make_unique<func::ComMpufFunctionality>(b, mix_seed(seed, "functionality"));
}

Event start_event() { return Event{}; }

Event open_command(std::optional<bool> b = std::nullopt) {
  Event ev;
  ev.kind = Event::Kind::kCommand;
  ev.message.name = "open";
  if (b) ev.message.add("b", BitString(1, *b));
  return ev;
}

struct CommitRun {
  std::unique_ptr<Session> s;
  std::unique_ptr<proto::MultiCommitter> com;
  std::unique_ptr<proto::MultiVerifier> ver;
  std::unique_ptr<proto::CommitterParty> cp;
  std::unique_ptr<proto::VerifierParty> vp;
  std::vector<BitString> xs;
  std::optional<ecc::RepetitionCode> code;  // empty for the single-token protocol
  std::string error;

  proto::CommitView view() const {
    if (auto* v = dynamic_cast<const proto::CollVerifier*>(ver.get())) return v->view();
    if (auto* v = dynamic_cast<const proto::OriginalVerifier*>(ver.get())) return v->view();
    if (auto* v = dynamic_cast<const proto::CpufVerifier*>(ver.get())) return v->view();
    return {};
  }
  std::vector<std::optional<BitString>> extracted() const {
    if (!code) return {};
    return extract::extract(s->functionality(), view(), *code);
  }
  void step(Party to, Event ev) {
    if (!error.empty()) return;
    try {
      s->post(to, std::move(ev));
      s->run();
    } catch (const Error& e) {
      error = e.code();
    }
  }
  void commit() {
    if (!error.empty()) return;
    try {
      s->post(Party::kP1, start_event());
      s->post(Party::kP2, start_event());
      s->run();
    } catch (const Error& e) {
      error = e.code();
    }
  }
  void open() {
    if (ver->committed() && !ver->failure()) step(Party::kP1, open_command());
  }
  std::string log() const { return s->event_log_text() + s->trace_text(); }
};

std::size_t value_len(const ExperimentConfig& cfg) { return cfg.k; }

// xs empty: fresh uniform values.
std::unique_ptr<CommitRun> build_commit(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& sender,
                                        const std::string& receiver, std::vector<BitString> xs = {}) {
  auto run = std::make_unique<CommitRun>();
  Rng input(mix_seed(seed, "input"));
  const std::size_t count = cfg.protocol == "collextpuf" ? cfg.count : 1;
  if (xs.empty())
    for (std::size_t i = 0; i < count; ++i) xs.push_back(BitString::random(input, value_len(cfg)));
  run->xs = xs;
  if (cfg.protocol == "cpuf") {
    const auto p = proto::make_cpuf_params(cfg.n, cfg.k, cfg.d_noise);
    run->com = adv::make_cpuf_committer(sender, p, xs[0]);
    run->ver = adv::make_cpuf_verifier(receiver, p);
  } else if (cfg.protocol == "extpuf" || cfg.protocol == "collextpuf") {
    const auto p = proto::make_extpuf_params(cfg.n, cfg.k, count, cfg.d_noise, 0, cfg.ext_d_min);
    run->code = p.code();
    run->com = adv::make_coll_committer(sender, p, xs);
    run->ver = adv::make_coll_verifier(receiver, p);
  } else if (cfg.protocol == "extpuf-original") {
    auto p = proto::make_original_params(cfg.n, cfg.k, cfg.d_noise, 4, cfg.ext_d_min);
    p.literal_second_check = cfg.literal_second_check;
    run->code = p.code();
    run->com = adv::make_original_committer(sender, p, xs[0]);
    if (receiver != "honest" && receiver != "honest-receiver")
      throw Error("UNCONSTRUCTIBLE", receiver + " against extpuf-original: no receiver strategies");
    run->ver = std::make_unique<proto::OriginalVerifier>(Party::kP2, "orig", p);
  } else {
    throw Error("CONFIG", "protocol: '" + cfg.protocol + "' is not a commitment");
  }
  run->s = std::make_unique<Session>(functionality_for(cfg, seed), mix_seed(seed, "session"));
  run->cp = std::make_unique<proto::CommitterParty>(*run->com);
  run->vp = std::make_unique<proto::VerifierParty>(*run->ver);
  run->s->attach(Party::kP1, run->cp.get());
  run->s->attach(Party::kP2, run->vp.get());
  return run;
}

bool is_uc(const std::string& protocol) {
  return protocol == "uccompiler" || protocol == "uccompiler-compat" || protocol == "blobeq";
}

// --------------------------------------------------------------- compiler

enum class World : std::uint8_t { kReal, kSimSender, kSimReceiver };

struct UcRun {
  std::unique_ptr<Session> s;
  func::CommitFunctionality fcom;
  std::unique_ptr<uc::UcSender> snd;
  std::unique_ptr<uc::UcReceiver> rcv;
  bool b = false;
  uc::UcOutcome out;
  std::string error;

  std::string log() const { return s->event_log_text() + s->trace_text(); }
};

std::unique_ptr<UcRun> run_uc(const ExperimentConfig& cfg, std::uint64_t seed, World world,
                              const std::string& sender = "honest") {
  auto run = std::make_unique<UcRun>();
  const auto backend = cfg.protocol == "uccompiler-compat" ? uc::Backend::kPerString : uc::Backend::kCollective;
  const auto params = uc::make_uc_params(cfg.pairs, cfg.n, backend, cfg.d_noise);
  Rng input(mix_seed(seed, "input"));
  run->b = input.bit();
  if (world == World::kSimSender) {
    // the sender's bit goes to the ideal commitment; the simulator sees it only at the opening
    run->fcom.commit(Party::kP1, BitString(1, run->b));
    run->snd = std::make_unique<sim::SimulatedSender>(params);
  } else {
    run->snd = adv::make_uc_sender(sender, params, run->b);
  }
  if (world == World::kSimReceiver) {
    run->rcv = std::make_unique<sim::SimulatedReceiver>(params, run->fcom);
  } else {
    run->rcv = std::make_unique<uc::UcReceiver>(params);
  }
  run->s = std::make_unique<Session>(functionality_for(cfg, seed), mix_seed(seed, "session"));
  run->s->attach(Party::kP1, run->snd.get());
  run->s->attach(Party::kP2, run->rcv.get());
  try {
    run->s->post(Party::kP1, start_event());
    run->s->post(Party::kP2, start_event());
    run->s->run();
    std::optional<bool> b = run->b;
    if (world == World::kSimSender) {
      b.reset();
      for (const auto& note : run->fcom.open(Party::kP1))
        if (note.to == Party::kAdversary && note.value) b = note.value->get(0);
    }
    run->s->post(Party::kP1, open_command(b));
    run->s->run();
  } catch (const Error& e) {
    run->error = e.code();
  }
  run->out = run->rcv->outcome();
  return run;
}

// Transcript features compared between the worlds.
std::string feature_cell(const UcRun& run) {
  std::string status = !run.error.empty() ? run.error
                       : !run.out.abort_step.empty() ? run.out.abort_step
                       : run.out.decided       ? "ok"
                                               : "undecided";
  bool parity = false;
  for (bool v : run.rcv->y()) parity ^= v;
  std::string bit = run.out.bit ? (*run.out.bit ? "1" : "0") : "-";
  return status + "|" + bit + "|" + (parity ? "1" : "0");
}

double histogram_distance(const ExperimentReport& r, const std::string& a, const std::string& b) {
  std::map<std::string, std::uint64_t> ha, hb;
  for (const auto& [k, v] : r.metrics) {
    if (k.rfind(a, 0) == 0) ha[k.substr(a.size())] = static_cast<std::uint64_t>(v);
    if (k.rfind(b, 0) == 0) hb[k.substr(b.size())] = static_cast<std::uint64_t>(v);
  }
  return bitlab::empirical_distance(ha, hb);
}

// ------------------------------------------------------------ properties

TrialResult completeness_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  if (is_uc(cfg.protocol)) {
    auto run = run_uc(cfg, seed, World::kReal);
    tr.log = run->log();
    tr.res = run->s->resources();
    if (!run->error.empty()) {
      tr.abort(run->error);
    } else if (!run->out.abort_step.empty()) {
      tr.abort(run->out.abort_step);
    } else if (cfg.protocol == "blobeq" ? run->out.committed
                                        : run->out.decided && run->out.bit == std::optional<bool>(run->b)) {
      tr.success();
    } else {
      tr.failure();
    }
    return tr;
  }
  auto run = build_commit(cfg, seed, "honest", "honest");
  run->commit();
  const auto extracted = run->extracted();
  run->open();
  tr.log = run->log();
  tr.res = run->s->resources();
  if (!run->error.empty()) return tr.abort(run->error), tr;
  if (run->ver->failure()) return tr.abort(*run->ver->failure()), tr;
  bool ok = run->ver->committed();
  std::vector<bool> seen(run->xs.size(), false);
  for (const auto& v : run->ver->verdicts()) {
    if (!v.accepted) return tr.abort("reject: " + v.reason), tr;
    ok = ok && v.index < run->xs.size() && v.value == run->xs[v.index];
    if (v.index < seen.size()) seen[v.index] = true;
  }
  for (bool s : seen) ok = ok && s;
  if (run->code) {
    bool ex = extracted.size() == run->xs.size();
    for (std::size_t i = 0; ex && i < extracted.size(); ++i) ex = extracted[i] && *extracted[i] == run->xs[i];
    // reported only: extraction fails when r is zero on a whole block,
    // which honest acceptance does not care about
    if (ex) tr.add("extracted_correctly");
  }
  ok ? tr.success() : tr.failure();
  return tr;
}

// The committed value is taken to be the extractor's output; a violation is
// an accepted opening to anything else.
std::size_t violations(const CommitRun& run, const std::vector<std::optional<BitString>>& extracted) {
  std::size_t n = 0;
  for (const auto& v : run.ver->verdicts()) {
    if (!v.accepted) continue;
    if (v.index >= extracted.size() || !extracted[v.index] || *extracted[v.index] != v.value) ++n;
  }
  return n;
}

TrialResult attack_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  auto run = build_commit(cfg, seed, cfg.adversary, "honest", {BitString(cfg.k)});
  run->commit();
  const auto extracted = run->extracted();
  run->open();
  tr.log = run->log();
  tr.res = run->s->resources();
  if (!run->error.empty()) return tr.abort(run->error), tr;
  const bool bottom = extracted.size() == 1 && !extracted[0];
  bool accepted_zero = false;
  for (const auto& v : run->ver->verdicts()) accepted_zero = accepted_zero || (v.accepted && v.value.all_zero());
  if (bottom) tr.add("extractor_bottom");
  if (accepted_zero) tr.add("accepted_zero");
  (bottom && accepted_zero) ? tr.success() : tr.failure();
  return tr;
}

std::vector<std::string> members_for(const ExperimentConfig& cfg, adv::Role role) {
  if (cfg.adversary != "zoo") return {cfg.adversary};
  std::vector<std::string> out;
  for (const auto& m : adv::zoo())
    if (m.role == role && adv::applies(m, cfg.protocol)) out.push_back(m.id);
  return out;
}

TrialResult extraction_trial(const ExperimentConfig& cfg, const std::string& who, std::uint64_t seed) {
  TrialResult tr;
  auto run = build_commit(cfg, seed, who, "honest");
  run->commit();
  const auto extracted = run->extracted();
  run->open();
  tr.log = run->log();
  tr.res = run->s->resources();
  const std::size_t bad = violations(*run, extracted);
  tr.add("trials." + who);
  if (bad) {
    tr.add("violations");
    tr.add("violations." + who);
    tr.failure();
    return tr;
  }
  if (!run->error.empty()) return tr.abort(run->error), tr;
  if (run->ver->failure()) return tr.abort(*run->ver->failure()), tr;
  if (who == "honest" || who == "honest-sender") {
    bool ex = extracted.size() == run->xs.size();
    for (std::size_t i = 0; ex && i < extracted.size(); ++i) ex = extracted[i] && *extracted[i] == run->xs[i];
    tr.add("honest_trials");
    if (ex) tr.add("honest_extracted");
  }
  tr.success();
  return tr;
}

// Index of the record that returned the second token to its creator.
std::optional<std::size_t> return_record(const func::PufFunctionality& f, func::Sid ext) {
  const auto& log = f.log();
  for (std::size_t i = 0; i < log.size(); ++i)
    if (log[i].kind == "handover" && log[i].sid == ext && log[i].sender == Party::kP1 && !log[i].deliveries.empty())
      return i;
  return std::nullopt;
}

TrialResult neutralization_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  bool refused = false;
  try {
    build_commit(cfg, seed, "double-query-sender", "honest");
  } catch (const Error& e) {
    refused = std::string(e.code()) == "UNCONSTRUCTIBLE";
  }
  if (refused) tr.add("construction_refused");

  auto run = build_commit(cfg, seed, "late-query-sender", "honest");
  run->commit();
  const auto extracted = run->extracted();
  run->open();
  tr.log = run->log();
  tr.res = run->s->resources();
  const auto view = run->view();
  const auto& f = run->s->functionality();
  const auto ret = return_record(f, view.ext_sid);
  bool structural = ret.has_value();
  if (ret) {
    // nothing the sender asks the second token after giving it back gets an answer
    for (std::size_t i = *ret + 1; i < f.log().size(); ++i) {
      const auto& rec = f.log()[i];
      if (rec.kind == "eval" && rec.sid == view.ext_sid && rec.sender == Party::kP1) {
        tr.add("late_queries_logged");
        if (!rec.deliveries.empty()) structural = false;
      }
    }
    // r leaves the receiver only after the second token is back
    for (const auto& t : run->s->trace())
      if (t.kind == proto::TraceEntry::Kind::kMessage && t.from == Party::kP2 && t.message.name == "r" &&
          t.fn_index <= *ret)
        structural = false;
  }
  const auto* probe = dynamic_cast<const adv::QueryProbe*>(run->com.get());
  if (probe) {
    tr.add("late_queries_attempted", static_cast<double>(probe->attempted_late_queries()));
    tr.add("late_queries_answered", static_cast<double>(probe->answered_late_queries()));
    structural = structural && probe->answered_late_queries() == 0 && probe->attempted_late_queries() > 0;
  }
  const std::size_t bad = violations(*run, extracted);
  if (bad) tr.add("violations");
  if (!run->error.empty()) return tr.abort(run->error), tr;
  (refused && structural && bad == 0) ? tr.success() : tr.failure();
  return tr;
}

TrialResult binding_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  auto run = build_commit(cfg, seed, cfg.adversary, "honest");
  run->commit();
  run->open();
  tr.log = run->log();
  tr.res = run->s->resources();
  if (const auto* eq = dynamic_cast<const adv::Equivocator*>(run->com.get()); eq && eq->produced_second_opening())
    tr.add("second_openings");
  std::map<std::size_t, std::set<BitString>> accepted;
  for (const auto& v : run->ver->verdicts()) {
    if (v.accepted) accepted[v.index].insert(v.value);
    else tr.add("rejected_openings");
  }
  bool broken = false;
  for (const auto& [i, vals] : accepted) broken = broken || vals.size() > 1;
  if (broken) {
    tr.add("binding_breaks");
    tr.failure();
    return tr;
  }
  if (!run->error.empty()) return tr.abort(run->error), tr;
  tr.success();
  return tr;
}

TrialResult hiding_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  Rng coin(mix_seed(seed, "hiding-bit"));
  const bool b = coin.bit();
  const std::size_t count = cfg.protocol == "collextpuf" ? cfg.count : 1;
  std::vector<BitString> xs(count, BitString(cfg.k, b));
  auto run = build_commit(cfg, seed, "honest", cfg.adversary, xs);
  run->commit();
  tr.log = run->log();
  tr.res = run->s->resources();
  if (!run->error.empty()) return tr.abort(run->error), tr;
  if (!run->ver->committed()) return tr.abort(run->ver->failure().value_or("incomplete")), tr;
  auto* d = dynamic_cast<adv::Distinguisher*>(run->ver.get());
  if (!d) throw Error("CONFIG", "adversary: " + cfg.adversary + " is not a distinguisher");
  const bool guess = d->guess(*run->s);
  tr.add("games");
  if (guess == b) {
    tr.add("correct");
    tr.success();
  } else {
    tr.failure();
  }
  return tr;
}

TrialResult cost_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  ResourceCounters res;
  std::string log;
  if (is_uc(cfg.protocol)) {
    auto run = run_uc(cfg, seed, World::kReal);
    res = run->s->resources();
    log = run->log();
    if (!run->error.empty() || !run->out.decided) tr.abort(run->error.empty() ? run->out.abort_step : run->error);
  } else {
    auto run = build_commit(cfg, seed, "honest", "honest");
    run->commit();
    run->open();
    res = run->s->resources();
    log = run->log();
    if (!run->error.empty()) tr.abort(run->error);
  }
  tr.res = res;
  tr.log = std::move(log);
  if (tr.outcome == TrialResult::Outcome::kAbort) return tr;
  const auto [pufs, phases] = expected_cost(cfg.protocol, cfg.pairs);
  (res.pufs_created == pufs && res.exchange_phases == phases) ? tr.success() : tr.failure();
  return tr;
}

TrialResult tq_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  auto bad = build_commit(cfg, seed, "token-substituting-sender", "honest");
  bad->commit();
  bad->open();
  auto good = build_commit(cfg, mix_seed(seed, "honest"), "honest", "honest");
  good->commit();
  good->open();
  tr.log = bad->log() + good->log();
  tr.res = bad->s->resources();
  const bool detected = bad->ver->failure() == std::optional<std::string>("TQ_FAIL");
  const bool false_positive = good->ver->failure() == std::optional<std::string>("TQ_FAIL");
  const auto* probe = dynamic_cast<const adv::QueryProbe*>(bad->com.get());
  if (detected) tr.add("detected");
  if (false_positive) tr.add("false_positives");
  if (probe) tr.add("kept_token_answers", static_cast<double>(probe->answered_late_queries()));
  (detected && !false_positive) ? tr.success() : tr.failure();
  return tr;
}

TrialResult budget_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  if (cfg.adversary == "leaking-token-sender") {
    auto run = build_commit(cfg, seed, cfg.adversary, "honest");
    run->commit();
    run->open();
    tr.log = run->log();
    tr.res = run->s->resources();
    std::size_t delivered = 0, dropped = 0;
    for (const auto& rec : run->s->functionality().log()) {
      for (const auto& d : rec.deliveries) delivered += d.kind == func::Delivery::Kind::kOutMsg;
      dropped += rec.note.find("dropped") != std::string::npos;
    }
    tr.add("outmsg_delivered", static_cast<double>(delivered));
    tr.add("outmsg_dropped", static_cast<double>(dropped));
    bool accepted = !run->ver->verdicts().empty();
    for (const auto& v : run->ver->verdicts()) accepted = accepted && v.accepted;
    const bool within = !cfg.k_out || *cfg.k_out > 0 || delivered == 0;
    if (!run->error.empty()) return tr.abort(run->error), tr;
    (within && accepted) ? tr.success() : tr.failure();
    return tr;
  }
  if (cfg.adversary == "recording-token-receiver") {
    Rng coin(mix_seed(seed, "hiding-bit"));
    const bool b = coin.bit();
    const std::size_t count = cfg.protocol == "collextpuf" ? cfg.count : 1;
    auto run = build_commit(cfg, seed, "honest", cfg.adversary, std::vector<BitString>(count, BitString(cfg.k, b)));
    run->commit();
    tr.log = run->log();
    tr.res = run->s->resources();
    if (cfg.k_state) {
      // a bounded state budget has to stop this token at creation
      if (run->error == "STATE_BUDGET") {
        tr.add("rejected");
        tr.success();
      } else {
        tr.failure();
      }
      return tr;
    }
    if (!run->error.empty()) return tr.abort(run->error), tr;
    auto* d = dynamic_cast<adv::Distinguisher*>(run->ver.get());
    const bool learned = d && run->ver->committed() && d->guess(*run->s) == b;
    if (learned) tr.add("learned");
    learned ? tr.success() : tr.failure();
    return tr;
  }
  throw Error("CONFIG", "adversary: budget runs use leaking-token-sender or recording-token-receiver");
}

TrialResult uc_sim_trial(const ExperimentConfig& cfg, std::uint64_t seed, bool corrupt_receiver) {
  TrialResult tr;
  auto real = run_uc(cfg, mix_seed(seed, "real"), World::kReal);
  auto ideal = run_uc(cfg, mix_seed(seed, "ideal"), corrupt_receiver ? World::kSimSender : World::kSimReceiver);
  tr.log = real->log() + ideal->log();
  tr.res = ideal->s->resources();
  tr.add("real|" + feature_cell(*real));
  tr.add("ideal|" + feature_cell(*ideal));
  const bool both = real->out.decided && ideal->out.decided;
  if (both) {
    tr.add("real.message_bits", static_cast<double>(real->s->resources().message_bits));
    tr.add("ideal.message_bits", static_cast<double>(ideal->s->resources().message_bits));
    tr.add("decided_both");
  }
  if (corrupt_receiver) {
    const auto* simr = dynamic_cast<const sim::SimulatedSender*>(ideal->snd.get());
    if (simr && simr->extracted_e()) tr.add("e_extracted");
    if (ideal->snd->abort_step() == "e-mismatch") tr.add("sim_abort");
  } else {
    const auto* sims = dynamic_cast<const sim::SimulatedReceiver*>(ideal->rcv.get());
    if (sims && sims->extracted_bit() == std::optional<bool>(ideal->b)) tr.add("b_extracted");
    if (sims && sims->simulator_aborted()) tr.add("sim_abort");
    // cheating sender: mixed blobs and a guessed e
    auto cheat_real = run_uc(cfg, mix_seed(seed, "eguess-real"), World::kReal, "e-guessing-sender");
    auto cheat_ideal = run_uc(cfg, mix_seed(seed, "eguess-ideal"), World::kSimReceiver, "e-guessing-sender");
    tr.log += cheat_real->log() + cheat_ideal->log();
    if (cheat_real->out.committed) tr.add("eguess.real_pass");
    const auto* cs = dynamic_cast<const sim::SimulatedReceiver*>(cheat_ideal->rcv.get());
    if (cs && cs->simulator_aborted()) tr.add("eguess.sim_abort");
  }
  both ? tr.success() : tr.failure();
  return tr;
}

// Runs one trial function twice with the same seed and compares the logs.
TrialResult determinism_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrialResult tr;
  std::string a, b;
  if (is_uc(cfg.protocol)) {
    a = run_uc(cfg, seed, World::kReal)->log();
    b = run_uc(cfg, seed, World::kReal)->log();
  } else {
    auto one = [&] {
      auto run = build_commit(cfg, seed, cfg.adversary, "honest");
      run->commit();
      run->open();
      return run->log();
    };
    a = one();
    b = one();
  }
  tr.log = a;
  a == b ? tr.success() : tr.failure();
  return tr;
}

ExperimentReport base_report(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.name = cfg.name.empty() ? cfg.property : cfg.name;
  r.seed = cfg.seed;
  return r;
}

void check_bound(ExperimentReport& r, const std::string& what, double freq, double p, double trials) {
  const double sigma = std::sqrt(p * (1 - p) / trials);
  r.check(what + " within 4 sigma of 2^-pairs", std::fabs(freq - p) <= 4 * sigma + 1e-12,
          "freq " + fmt(freq) + " vs " + fmt(p) + " (sigma " + fmt(sigma) + ")");
}

ExperimentReport run_impl(const ExperimentConfig& cfg) {
  ExperimentReport r = base_report(cfg);
  const auto& p = cfg.property;
  auto simple = [&](auto fn) {
    run_trials(cfg, cfg.trials, [&](std::uint64_t, std::uint64_t seed) { return fn(cfg, seed); }, r);
  };
  if (p == "completeness") {
    simple(completeness_trial);
    r.check("every honest run accepts", r.successes == r.trials,
            std::to_string(r.successes) + "/" + std::to_string(r.trials));
  } else if (p == "attack") {
    simple(attack_trial);
    r.check("extractor outputs nothing and the opening to 0 is accepted", r.successes == r.trials,
            std::to_string(r.successes) + "/" + std::to_string(r.trials));
  } else if (p == "neutralization") {
    simple(neutralization_trial);
    r.check("attack unconstructible and every transcript structurally clean", r.successes == r.trials,
            std::to_string(r.successes) + "/" + std::to_string(r.trials));
  } else if (p == "extraction") {
    const auto members = members_for(cfg, adv::Role::kSender);
    r.metrics["zoo_members"] = static_cast<double>(members.size());
    const std::uint64_t per = cfg.trials;
    run_trials(
        cfg, per * members.size(),
        [&](std::uint64_t t, std::uint64_t seed) { return extraction_trial(cfg, members[t / per], seed); }, r);
    r.check("no accepted opening differs from the extracted value", metric(r, "violations") == 0,
            fmt(metric(r, "violations")) + " violations");
    if (metric(r, "honest_trials") > 0)
      r.check("honest commitments extract correctly", metric(r, "honest_extracted") == metric(r, "honest_trials"),
              fmt(metric(r, "honest_extracted")) + "/" + fmt(metric(r, "honest_trials")));
  } else if (p == "binding") {
    simple(binding_trial);
    r.check("no two different accepted openings", metric(r, "binding_breaks") == 0,
            fmt(metric(r, "binding_breaks")) + " breaks in " + std::to_string(r.trials));
  } else if (p == "hiding") {
    simple(hiding_trial);
    const double games = metric(r, "games");
    const double adv = games > 0 ? std::fabs(metric(r, "correct") / games - 0.5) : 1.0;
    r.metrics["advantage"] = adv;
    r.check("distinguishing advantage at most 0.02", games > 0 && adv <= 0.02, "advantage " + fmt(adv));
  } else if (p == "cost") {
    simple(cost_trial);
    const auto [pufs, phases] = expected_cost(cfg.protocol, cfg.pairs);
    r.metrics["expected.pufs"] = static_cast<double>(pufs);
    r.metrics["expected.exchange_phases"] = static_cast<double>(phases);
    r.check("measured (PUFs, exchange phases) equal the expected counts", r.successes == r.trials,
            "expected (" + std::to_string(pufs) + ", " + std::to_string(phases) + ")");
  } else if (p == "lemmas") {
    r = bitlab::check_entropy_lemmas(cfg.trials, cfg.max_support, cfg.seed);
    r.name = base_report(cfg).name;
  } else if (p == "ecc-fe") {
    r = ecc_fe_experiment(cfg);
  } else if (p == "tq") {
    simple(tq_trial);
    const double det = metric(r, "detected") / static_cast<double>(r.trials);
    r.metrics["detection_rate"] = det;
    r.check("substitution detected in at least 99% of runs", det >= 0.99, "rate " + fmt(det));
    r.check("honest return never flagged", metric(r, "false_positives") == 0,
            fmt(metric(r, "false_positives")) + " false positives");
  } else if (p == "budget") {
    simple(budget_trial);
    r.check("budget enforcement matches the configured limits", r.successes == r.trials,
            std::to_string(r.successes) + "/" + std::to_string(r.trials));
  } else if (p == "uc-sim-receiver" || p == "uc-sim-sender") {
    const bool corrupt_receiver = p == "uc-sim-receiver";
    run_trials(cfg, cfg.trials,
               [&](std::uint64_t, std::uint64_t seed) { return uc_sim_trial(cfg, seed, corrupt_receiver); }, r);
    const double sd = histogram_distance(r, "real|", "ideal|");
    r.metrics["feature_distance"] = sd;
    r.check("feature histograms within 0.02", sd <= 0.02, "distance " + fmt(sd));
    r.check("message sizes agree", metric(r, "real.message_bits") == metric(r, "ideal.message_bits"));
    const double n = static_cast<double>(r.trials);
    if (corrupt_receiver) {
      r.check("simulator never aborts against an honest receiver", metric(r, "sim_abort") == 0);
    } else {
      r.check("simulator extracts the honest sender's bit", metric(r, "b_extracted") == n,
              fmt(metric(r, "b_extracted")) + "/" + fmt(n));
      const double pe = std::ldexp(1.0, -static_cast<int>(cfg.pairs));
      r.metrics["eguess.bound"] = pe;
      check_bound(r, "simulator abort frequency", metric(r, "eguess.sim_abort") / n, pe, n);
      check_bound(r, "real-world pass frequency", metric(r, "eguess.real_pass") / n, pe, n);
    }
  } else if (p == "determinism") {
    simple(determinism_trial);
    r.check("repeated runs give identical logs", r.successes == r.trials);
    // whole reports, rerun
    ExperimentConfig inner = cfg;
    inner.property = "completeness";
    inner.adversary = "honest";
    inner.trials = std::min<std::uint64_t>(cfg.trials, 20);
    inner.report_path.clear();
    inner.log_dir.clear();
    const auto a = run_impl(inner).to_json();
    const auto b = run_impl(inner).to_json();
    inner.seed = cfg.seed + 1;
    const auto c = run_impl(inner);
    r.check("repeated reports are byte-identical", a == b);
    r.check("a different seed changes the logs", c.digest != ExperimentReport{}.digest &&
                                                      c.to_json() != a);
  } else if (p == "cq") {
    r = cq_experiment(cfg);
  } else if (p == "indist") {
    r = indist_experiment(cfg);
  } else if (p == "crp") {
    r = crp_experiment(cfg);
  } else if (p == "tq-direct") {
    r = tq_direct_experiment(cfg);
  } else {
    throw Error("CONFIG", "property: unknown '" + p + "'");
  }
  return r;
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> expected_cost(const std::string& protocol, std::size_t pairs) {
  if (protocol == "cpuf") return {1, 1};
  if (protocol == "extpuf" || protocol == "collextpuf") return {2, 2};
  if (protocol == "extpuf-original") return {3, 2};
  if (protocol == "uccompiler" || protocol == "blobeq") return {4, 4};
  if (protocol == "uccompiler-compat") return {8 * pairs + 2, 8 * pairs + 2};
  throw Error("CONFIG", "protocol: unknown '" + protocol + "'");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport r = run_impl(cfg);
  if (!r.consistent()) r.check("successes + failures + aborts = trials", false);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!cfg.report_path.empty()) write_report(r, cfg.report_path);
  return r;
}

void write_report(const ExperimentReport& r, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << r.to_json();
  std::ofstream(std::filesystem::path(path + ".txt")) << r.summary_table();
}

ResourceCounters cost_report(const std::string& protocol, std::size_t n, std::size_t pairs, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.property = "cost";
  cfg.protocol = protocol;
  cfg.n = n;
  cfg.k = protocol == "cpuf" ? 4 : 1;
  cfg.pairs = pairs ? pairs : n;
  cfg.trials = 1;
  cfg.seed = seed;
  cfg.threads = 1;
  validate(cfg);
  return run_impl(cfg).resources;
}

DemoRun demo(const std::string& protocol, const std::string& adversary, std::size_t n, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.protocol = protocol;
  cfg.n = n;
  cfg.k = protocol == "cpuf" ? 4 : 1;
  cfg.count = protocol == "collextpuf" ? 4 : 1;
  cfg.pairs = 4;
  if (protocol == "extpuf-original") cfg.d_noise = 3;
  DemoRun d;
  if (is_uc(protocol)) {
    if (protocol == "uccompiler-compat") cfg.pairs = 2;
    auto run = run_uc(cfg, seed, World::kReal, adversary);
    d.trace = run->s->trace_text();
    d.event_log = run->s->event_log_text();
    d.ok = run->error.empty() && run->out.decided && run->out.bit == std::optional<bool>(run->b);
    d.outcome = "bit " + std::string(run->b ? "1" : "0") + " -> " +
                (run->out.bit ? std::string(*run->out.bit ? "1" : "0") : "none") +
                (run->out.abort_step.empty() ? "" : " (abort at " + run->out.abort_step + ")") +
                (run->error.empty() ? "" : " (error " + run->error + ")");
    return d;
  }
  const auto& m = adv::member(adversary);
  const std::string sender = m.role == adv::Role::kSender ? adversary : "honest";
  const std::string receiver = m.role == adv::Role::kReceiver ? adversary : "honest";
  auto run = build_commit(cfg, seed, sender, receiver,
                          adversary == "double-query-sender" ? std::vector<BitString>{BitString(cfg.k)}
                                                             : std::vector<BitString>{});
  run->commit();
  const auto extracted = run->extracted();
  run->open();
  d.trace = run->s->trace_text();
  d.event_log = run->s->event_log_text();
  std::string out;
  for (std::size_t i = 0; i < run->xs.size(); ++i) out += "x" + std::to_string(i) + "=" + run->xs[i].to_hex() + " ";
  for (std::size_t i = 0; i < extracted.size(); ++i)
    out += "extracted" + std::to_string(i) + "=" + (extracted[i] ? extracted[i]->to_hex() : std::string("none")) + " ";
  d.ok = run->error.empty() && !run->ver->failure() && !run->ver->verdicts().empty();
  for (const auto& v : run->ver->verdicts()) {
    out += "open" + std::to_string(v.index) + "=" + v.value.to_hex() + (v.accepted ? ":accept " : ":reject(" + v.reason + ") ");
    d.ok = d.ok && v.accepted;
  }
  if (run->ver->failure()) out += "failure=" + *run->ver->failure() + " ";
  if (!run->error.empty()) out += "error=" + run->error;
  d.outcome = out;
  return d;
}

}  // namespace pufcom::harness
