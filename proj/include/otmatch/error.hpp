#pragma once

#include <stdexcept>
#include <string>

namespace otm {

enum class Errc {
  ParseError,
  ValidationError,
  CalibrationError,
  BehindCamera,
  ParallelRays,
  DegenerateRig,
  DegenerateEpipole,
  InfeasibleMarginals,
  InfeasibleMass,
  ShapeMismatch,
  EmptyCloud,
  RejectionBudgetExceeded,
  IoError,
};

/// All library errors carry an Errc so callers (and the CLI exit-code
/// mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

const char* errc_name(Errc code) noexcept;

}  // namespace otm
