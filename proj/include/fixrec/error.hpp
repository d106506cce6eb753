#pragma once

#include <stdexcept>
#include <string>

namespace fixrec {

/// Thrown for data errors: malformed input files, contract violations,
/// version mismatches. The CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fixrec
