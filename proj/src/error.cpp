#include "tvlab/error.hpp"

namespace tvlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::TruncatedPayload: return "truncated payload";
    case ErrorCode::NonIncreasingTimes: return "non-increasing times";
    case ErrorCode::BadHeader: return "bad header";
    case ErrorCode::NonFiniteSample: return "non-finite sample";
    case ErrorCode::EmptyIntersection: return "empty intersection";
    case ErrorCode::BallTouchesMargin: return "ball touches margin";
    case ErrorCode::MissingTimeSlices: return "missing time slices";
    case ErrorCode::SupportViolation: return "support violation";
    case ErrorCode::MetadataMismatch: return "metadata mismatch";
    case ErrorCode::StabilityBound: return "stability bound";
    case ErrorCode::InadmissibleDual: return "inadmissible dual";
    case ErrorCode::PreconditionFailed: return "precondition failed";
    case ErrorCode::DivergentIterates: return "divergent iterates";
    case ErrorCode::UnknownExample: return "unknown example";
    case ErrorCode::InvalidConfig: return "invalid config";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace tvlab
