#include "npbrake/errors.hpp"

namespace npb {

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kOutOfDomain: return "out of domain";
    case ErrorCode::kDegenerateSurface: return "degenerate surface";
    case ErrorCode::kSingularOffset: return "singular offset";
    case ErrorCode::kEmptyStages: return "empty stages";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kSolverFailure: return "solver failure";
    case ErrorCode::kOffRoad: return "off road";
    case ErrorCode::kNumericalBlowup: return "numerical blowup";
    case ErrorCode::kIo: return "io error";
  }
  return "unknown error";
}

}  // namespace npb
