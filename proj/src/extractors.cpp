#include "pufcom/extractors.hpp"

#include "pufcom/error.hpp"

namespace pufcom::extract {

std::optional<BitString> extract_from_query(const BitString& st, const BitString& c, const BitString& r,
                                            std::size_t k) {
  if (st.size() != c.size() || c.size() != r.size()) throw Error("LEN_MISMATCH", "extraction inputs");
  if (k == 0 || c.size() % k != 0) throw Error("LEN_MISMATCH", "block structure");
  const BitString diff = c ^ st;  // zero on I_j when c matches st there
  BitString out(k);
  for (std::size_t j = 0; j < k; ++j) {
    bool match_st = true, match_flip = true;
    for (std::size_t p = j; p < c.size(); p += k) {
      const bool d = diff.get(p);
      if (d) match_st = false;
      if (d != r.get(p)) match_flip = false;
    }
    if (match_st == match_flip) return std::nullopt;
    out.set(j, match_flip);
  }
  return out;
}

std::vector<Query> queries_to(const func::PufFunctionality& f, func::Sid sid, func::Party querier,
                              std::size_t upto) {
  std::vector<Query> out;
  const auto& log = f.log();
  for (std::size_t i = 0; i < log.size() && i < upto; ++i) {
    const auto& rec = log[i];
    if (rec.kind != "eval" || rec.sid != sid || rec.sender != querier || rec.deliveries.empty()) continue;
    out.push_back({rec.step, rec.payload});
  }
  return out;
}

std::vector<std::optional<BitString>> extract(const func::PufFunctionality& f, const proto::CommitView& view,
                                              const ecc::RepetitionCode& code) {
  std::vector<std::optional<BitString>> out(view.c.size());
  if (!view.complete) return out;
  const auto qs = queries_to(f, view.ext_sid, view.committer, view.commit_end_step);
  std::vector<BitString> decoded;
  for (const auto& q : qs) {
    if (q.challenge.size() == code.params().code_len) decoded.push_back(code.decode(q.challenge));
  }
  for (std::size_t i = 0; i < view.c.size(); ++i) {
    std::set<BitString> candidates;
    for (const auto& st : decoded) {
      if (st.size() != view.c[i].size()) continue;
      if (auto x = extract_from_query(st, view.c[i], view.r[i], view.k)) candidates.insert(*x);
    }
    if (candidates.size() == 1) out[i] = *candidates.begin();
  }
  return out;
}

}  // namespace pufcom::extract
