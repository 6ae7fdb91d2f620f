#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hybrid {

enum class ErrorCode {
  ConfigError,
  BoundaryMass,
  NonPositiveWidth,
  NotNormalized,
  ShapeMismatch,
  NodeDominated,
  OutsideFamily,
  SectorMixing,
  ParseError,
  StepTooLarge,
  WrongTag,
  TagRefusal,
  UncertaintyViolation,
  Inadmissible,
  InvalidState,
  SingularCovariance,
  NotOrthogonal,
  FixDoesNotMap,
  MalformedScript,
  InitializerMismatch,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code identifies the contract
/// that was violated; the message carries the specifics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::BoundaryMass: return "BoundaryMass";
    case ErrorCode::NonPositiveWidth: return "NonPositiveWidth";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NodeDominated: return "NodeDominated";
    case ErrorCode::OutsideFamily: return "OutsideFamily";
    case ErrorCode::SectorMixing: return "SectorMixing";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::WrongTag: return "WrongTag";
    case ErrorCode::TagRefusal: return "TagRefusal";
    case ErrorCode::UncertaintyViolation: return "UncertaintyViolation";
    case ErrorCode::Inadmissible: return "Inadmissible";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::FixDoesNotMap: return "FixDoesNotMap";
    case ErrorCode::MalformedScript: return "MalformedScript";
    case ErrorCode::InitializerMismatch: return "InitializerMismatch";
  }
  return "Unknown";
}

}  // namespace hybrid
