#pragma once

#include <stdexcept>
#include <string>

namespace ldg {

/// Failure categories raised by the library. The harness maps these onto
/// process exit codes.
enum class ErrorCode {
  InvalidArgument,
  NotInS0,
  ZeroP,
  NegativePsq,
  ResolutionTooCoarse,
  GridTopology,
  PhaseJumpTooLarge,
  DefectsTooClose,
  Diverged,
  ChargeMismatch,
  UnwrapFailure,
  DefectTooCloseToBoundary,
  InsufficientSamples,
  NotADisk,
  ConfigInvalid,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ldg
