#pragma once

#include <optional>
#include <set>
#include <vector>

#include "pufcom/ecc.hpp"
#include "pufcom/functionality.hpp"
#include "pufcom/protocols.hpp"

namespace pufcom::extract {

// Block j covers positions j, j+k, j+2k, ... For each block: 0 if c agrees
// with st there but not with st^r, 1 in the mirrored case; anything else
// (both or neither) gives no answer for the whole string.
std::optional<BitString> extract_from_query(const BitString& st, const BitString& c, const BitString& r,
                                            std::size_t k);

struct Query {
  std::uint64_t step = 0;
  BitString challenge;
};

// Answered queries by `querier` to token `sid` among the first `upto` log records.
std::vector<Query> queries_to(const func::PufFunctionality& f, func::Sid sid, func::Party querier, std::size_t upto);

// One value per committed string; std::nullopt when the queries pin down no
// value or more than one.
std::vector<std::optional<BitString>> extract(const func::PufFunctionality& f, const proto::CommitView& view,
                                              const ecc::RepetitionCode& code);

}  // namespace pufcom::extract
