#pragma once

#include <stdexcept>
#include <string>

namespace mazt {

enum class ErrorCode {
  InvalidArgument = 1,
  NonZeroMean,
  NonKahler,
  BadMass,
  NoConvergence,
  SeshadriViolation,
  NotClassifiable,
  BadReference,
  InfeasibleClass,
  EmptyBoundary,
  EmptyRegion,
  WrongRegime,
  ConcavityViolation,
  ParseError,
  ValidationError,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mazt
