#pragma once

#include <stdexcept>
#include <string>

namespace mvm {

// All library failures carry a stable machine-readable code next to the
// human message, so callers (and the CLI exit-code mapping) can dispatch
// without string matching on prose.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace mvm
