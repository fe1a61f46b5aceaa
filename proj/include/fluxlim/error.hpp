#pragma once

#include <stdexcept>
#include <string>

namespace fluxlim {

/// Raised for every contract violation detected at run time. The message
/// starts with a short stable tag (e.g. "positivity violated") that callers
/// and tests match on.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fluxlim
