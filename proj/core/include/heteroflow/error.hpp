#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heteroflow {

enum class ErrorCode {
  // graph construction
  SelfLoop,
  DuplicateEdge,
  Disconnected,
  IndexOutOfRange,
  TooLarge,
  // linear algebra
  NotSymmetric,
  NoConvergence,
  DimensionMismatch,
  ShapeMismatch,
  ZeroFeatureNorm,
  ZeroNorm,
  EdgeNotInGraph,
  NonFiniteValue,
  // generation
  TargetOutOfRange,
  InvalidArgument,
  EmptySplit,
  // dynamics / training
  Diverged,
  NonFiniteLoss,
  // metrics
  NonpositiveBandwidth,
  TooFewSamples,
  EmptySample,
  ZeroInitialSubsetEnergy,
  // io
  ParseError,
  ValidationError,
  IoError,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorKind { Validation, Numerical, Io };

ErrorKind kind_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace heteroflow
