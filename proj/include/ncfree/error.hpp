#pragma once

#include <stdexcept>
#include <string>

namespace ncfree {

enum class ErrorCode {
  NonPositiveLambda,
  EmptyContext,
  VarCountMismatch,
  DimMismatch,
  IndexOutOfRange,
  NotCyclicallySymmetric,
  BadGamma,
  HypothesisViolation,
  NormTooLarge,
  NoConvergence,
  NotGradient,
  ContractionFailure,
  LevelTooLarge,
  GramNotPositive,
  NeumannDivergence,
  DenominatorNonpositive,
  MissingInverse,
  BadInput,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::VarCountMismatch: return "VarCountMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotCyclicallySymmetric: return "NotCyclicallySymmetric";
    case ErrorCode::BadGamma: return "BadGamma";
    case ErrorCode::HypothesisViolation: return "HypothesisViolation";
    case ErrorCode::NormTooLarge: return "NormTooLarge";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotGradient: return "NotGradient";
    case ErrorCode::ContractionFailure: return "ContractionFailure";
    case ErrorCode::LevelTooLarge: return "LevelTooLarge";
    case ErrorCode::GramNotPositive: return "GramNotPositive";
    case ErrorCode::NeumannDivergence: return "NeumannDivergence";
    case ErrorCode::DenominatorNonpositive: return "DenominatorNonpositive";
    case ErrorCode::MissingInverse: return "MissingInverse";
    case ErrorCode::BadInput: return "BadInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ncfree
