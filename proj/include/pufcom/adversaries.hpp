#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pufcom/protocols.hpp"
#include "pufcom/uccompiler.hpp"

namespace pufcom::adv {

using proto::Party;
using proto::Session;

enum class Role { kSender, kReceiver };

struct ZooMember {
  std::string id;
  Role role;
  std::vector<std::string> protocols;  // protocol ids it can be run against
  std::string game;                    // default experiment for this member
  std::string description;
};

const std::vector<ZooMember>& zoo();
const ZooMember& member(const std::string& id);  // throws CONFIG for unknown ids
bool applies(const ZooMember& m, const std::string& protocol);

// Receivers that try to tell commitments apart.
class Distinguisher {
 public:
  virtual ~Distinguisher() = default;
  virtual bool guess(Session& s) = 0;
};

// Senders that may submit more than one opening.
class Equivocator {
 public:
  virtual ~Equivocator() = default;
  virtual bool produced_second_opening() const = 0;
};

// Things a sender could learn by cheating: how many late queries were answered.
class QueryProbe {
 public:
  virtual ~QueryProbe() = default;
  virtual std::size_t answered_late_queries() const = 0;
  virtual std::size_t attempted_late_queries() const = 0;
};

// Factories. `id` names a zoo member or "honest". Throws UNCONSTRUCTIBLE when
// the strategy has no meaning against the protocol.
std::unique_ptr<proto::MultiCommitter> make_cpuf_committer(const std::string& id, const proto::CpufParams& p,
                                                           BitString x);
std::unique_ptr<proto::MultiVerifier> make_cpuf_verifier(const std::string& id, const proto::CpufParams& p);
std::unique_ptr<proto::MultiCommitter> make_coll_committer(const std::string& id, const proto::ExtPufParams& p,
                                                           std::vector<BitString> xs);
std::unique_ptr<proto::MultiVerifier> make_coll_verifier(const std::string& id, const proto::ExtPufParams& p);
std::unique_ptr<proto::MultiCommitter> make_original_committer(const std::string& id,
                                                               const proto::OriginalExtPufParams& p, BitString x);
std::unique_ptr<uc::UcSender> make_uc_sender(const std::string& id, const uc::UcParams& p, bool b);

// Token program that remembers the decoded content of the n-th query and
// reveals it when asked the all-ones challenge.
std::shared_ptr<puf::PufProgram> recording_program(ecc::RepetitionCode code, std::size_t which, std::size_t rg);

}  // namespace pufcom::adv
