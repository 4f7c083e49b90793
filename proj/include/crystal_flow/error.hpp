#pragma once

#include <stdexcept>
#include <string>

namespace crystal_flow {

enum class ErrorKind {
  NonConvexWulff,
  OriginOutside,
  DegenerateFacet,
  IndexOutOfRange,
  NotAdmissible,
  DegenerateSegment,
  BadTopology,
  DimensionMismatch,
  SegmentCollapse,
  NotClosed,
  WindowTooSmall,
  ZeroLengthSegment,
  InvalidTriple,
  NotParallel,
  NotStationary,
  StepUnderflow,
  NonzeroCurvatureCollapse,
  NotAdmissibleAfterMerge,
  InsufficientSamples,
  InvalidClassParams,
  HalfLinesNotParallel,
  ParamOutOfRange,
  SchemaError,
  BuildError,
  CheckFailed,
  IOFailure,
  TimeOutOfRange,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace crystal_flow
