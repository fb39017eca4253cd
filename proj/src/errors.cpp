#include "blowup/errors.hpp"

namespace blowup {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateNormals: return "DegenerateNormals";
    case ErrorCode::InvalidComponents: return "InvalidComponents";
    case ErrorCode::OnBoundary: return "OnBoundary";
    case ErrorCode::NoProjection: return "NoProjection";
    case ErrorCode::BadAngle: return "BadAngle";
    case ErrorCode::Pole: return "Pole";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::WindowEmpty: return "WindowEmpty";
    case ErrorCode::OutsideWindow: return "OutsideWindow";
    case ErrorCode::InconsistentDistances: return "InconsistentDistances";
    case ErrorCode::MaskTooCoarse: return "MaskTooCoarse";
    case ErrorCode::NonMonotoneTail: return "NonMonotoneTail";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace blowup
