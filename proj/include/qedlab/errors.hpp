#pragma once

#include <stdexcept>
#include <string>

namespace qedlab {

// Error categories, used by the CLI to pick an exit code:
// user-input problems (parameter, grid, sequence, config, parse) map to
// exit 2, numerical failures (degenerate system, calibration, truncation,
// non-convergence) map to exit 3.
enum class ErrorKind {
  parameter,
  degenerate_system,
  grid,
  sequence,
  calibration,
  truncation,
  config,
  parse,
  numeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qedlab
