#pragma once

#include <stdexcept>
#include <string>

namespace tvlab {

enum class ErrorCode {
  BadMagic,
  TruncatedPayload,
  NonIncreasingTimes,
  BadHeader,
  NonFiniteSample,
  EmptyIntersection,
  BallTouchesMargin,
  MissingTimeSlices,
  SupportViolation,
  MetadataMismatch,
  StabilityBound,
  InadmissibleDual,
  PreconditionFailed,
  DivergentIterates,
  UnknownExample,
  InvalidConfig,
  InvalidArgument,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tvlab
