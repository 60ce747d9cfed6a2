#include "mazt/errors.hpp"

namespace mazt {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonZeroMean: return "NonZeroMean";
    case ErrorCode::NonKahler: return "NonKahler";
    case ErrorCode::BadMass: return "BadMass";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SeshadriViolation: return "SeshadriViolation";
    case ErrorCode::NotClassifiable: return "NotClassifiable";
    case ErrorCode::BadReference: return "BadReference";
    case ErrorCode::InfeasibleClass: return "InfeasibleClass";
    case ErrorCode::EmptyBoundary: return "EmptyBoundary";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::ConcavityViolation: return "ConcavityViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mazt
