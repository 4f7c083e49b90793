#include "crystal_flow/error.hpp"

namespace crystal_flow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvexWulff: return "NonConvexWulff";
    case ErrorKind::OriginOutside: return "OriginOutside";
    case ErrorKind::DegenerateFacet: return "DegenerateFacet";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NotAdmissible: return "NotAdmissible";
    case ErrorKind::DegenerateSegment: return "DegenerateSegment";
    case ErrorKind::BadTopology: return "BadTopology";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SegmentCollapse: return "SegmentCollapse";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::ZeroLengthSegment: return "ZeroLengthSegment";
    case ErrorKind::InvalidTriple: return "InvalidTriple";
    case ErrorKind::NotParallel: return "NotParallel";
    case ErrorKind::NotStationary: return "NotStationary";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NonzeroCurvatureCollapse: return "NonzeroCurvatureCollapse";
    case ErrorKind::NotAdmissibleAfterMerge: return "NotAdmissibleAfterMerge";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::InvalidClassParams: return "InvalidClassParams";
    case ErrorKind::HalfLinesNotParallel: return "HalfLinesNotParallel";
    case ErrorKind::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::BuildError: return "BuildError";
    case ErrorKind::CheckFailed: return "CheckFailed";
    case ErrorKind::IOFailure: return "IOFailure";
    case ErrorKind::TimeOutOfRange: return "TimeOutOfRange";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace crystal_flow
