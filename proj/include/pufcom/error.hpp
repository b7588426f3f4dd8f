#pragma once

#include <stdexcept>
#include <string>

namespace pufcom {

// Error codes are short upper-case tags such as "LEN_MISMATCH"; tests match on them.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace pufcom
