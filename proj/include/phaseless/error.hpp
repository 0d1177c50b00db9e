#pragma once

#include <stdexcept>
#include <string>

namespace phaseless {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
  Domain,      // argument outside the mathematical domain
  Geometry,    // invalid or inadmissible geometry
  Config,      // malformed input/configuration
  Data,        // pipeline/data inconsistency (grids, masks, stale inputs)
  Numerical,   // conditioning, convergence, expansion validity
  Ambiguous,   // branch selection could not decide
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace phaseless
