#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

enum class ErrorCode {
  InvalidArgument,
  DegenerateNormals,
  InvalidComponents,
  OnBoundary,
  NoProjection,
  BadAngle,
  Pole,
  OutsideDomain,
  NoConvergence,
  WindowEmpty,
  OutsideWindow,
  InconsistentDistances,
  MaskTooCoarse,
  NonMonotoneTail,
  InsufficientSamples,
  BoundViolated,
  ConfigError,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace blowup
