#include "dmpj/core.hpp"

namespace dmpj {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IsolatedVertex: return "IsolatedVertex";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NonDivisibleDimensions: return "NonDivisibleDimensions";
    case ErrorCode::Defective: return "Defective";
    case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::NonDifferentiablePoint: return "NonDifferentiablePoint";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::Defective:
    case ErrorCode::ZeroEigenvalue:
    case ErrorCode::IllConditioned:
    case ErrorCode::SingularBlock:
    case ErrorCode::NonDifferentiablePoint:
    case ErrorCode::DivergedLoss:
    case ErrorCode::ZeroReference:
      return true;
    default:
      return false;
  }
}

}  // namespace dmpj
