#pragma once

#include <stdexcept>
#include <string>

namespace manikin {

enum class ErrorCode {
  CycleDetected,
  DuplicateId,
  NonUnitAxis,
  InvalidLimits,
  DimensionMismatch,
  UnknownLink,
  ZeroTotalMass,
  SingularMass,
  NonPositiveDt,
  NoEligibleController,
  EmptyGraspSet,
  DuplicateHand,
  UnrealizableWrench,
  UnplannableGoal,
  RegionTooSmall,
  DegenerateCone,
  UnknownHand,
  ParseError,
  ValidationError,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NonUnitAxis: return "NonUnitAxis";
    case ErrorCode::InvalidLimits: return "InvalidLimits";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownLink: return "UnknownLink";
    case ErrorCode::ZeroTotalMass: return "ZeroTotalMass";
    case ErrorCode::SingularMass: return "SingularMass";
    case ErrorCode::NonPositiveDt: return "NonPositiveDt";
    case ErrorCode::NoEligibleController: return "NoEligibleController";
    case ErrorCode::EmptyGraspSet: return "EmptyGraspSet";
    case ErrorCode::DuplicateHand: return "DuplicateHand";
    case ErrorCode::UnrealizableWrench: return "UnrealizableWrench";
    case ErrorCode::UnplannableGoal: return "UnplannableGoal";
    case ErrorCode::RegionTooSmall: return "RegionTooSmall";
    case ErrorCode::DegenerateCone: return "DegenerateCone";
    case ErrorCode::UnknownHand: return "UnknownHand";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace manikin
