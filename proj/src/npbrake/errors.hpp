#pragma once

#include <stdexcept>
#include <string>

namespace npb {

enum class ErrorCode {
  kInvalidArgument,
  kConfig,
  kOutOfDomain,
  kDegenerateSurface,
  kSingularOffset,
  kEmptyStages,
  kInfeasible,
  kSolverFailure,
  kOffRoad,
  kNumericalBlowup,
  kIo,
};

const char* ToString(ErrorCode code);

// Single exception type for the library; the C API maps `code()` onto
// npb_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Throw(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(ToString(code)) + ": " + what);
}

}  // namespace npb
