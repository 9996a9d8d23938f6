#include "heteroflow/error.hpp"

namespace heteroflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroFeatureNorm: return "ZeroFeatureNorm";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::EdgeNotInGraph: return "EdgeNotInGraph";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::NonpositiveBandwidth: return "NonpositiveBandwidth";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::ZeroInitialSubsetEnergy: return "ZeroInitialSubsetEnergy";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoConvergence:
    case ErrorCode::Diverged:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::NonFiniteValue:
      return ErrorKind::Numerical;
    case ErrorCode::IoError:
      return ErrorKind::Io;
    default:
      return ErrorKind::Validation;
  }
}

}  // namespace heteroflow
