#include "parabolic/errors.hpp"

namespace parabolic {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidAxis: return "InvalidAxis";
    case ErrorCode::NotElliptic: return "NotElliptic";
    case ErrorCode::DecayTooSmall: return "DecayTooSmall";
    case ErrorCode::MethodMismatch: return "MethodMismatch";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::TooManyModes: return "TooManyModes";
    case ErrorCode::WindowTooSparse: return "WindowTooSparse";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace parabolic
