#pragma once

// Error taxonomy shared by every monoview module.  All failures surface as
// monoview::Error carrying a stable machine-readable code; the CLI serializes
// the code name verbatim, so names here are part of the tool's interface.

#include <stdexcept>
#include <string>

namespace monoview {

enum class ErrorCode {
  TooFewPoints,
  DegenerateConfiguration,
  NoModelFound,
  ImageTooSmall,
  EmptySet,
  InsufficientCorrespondences,
  WindowTooLarge,
  AllZeroAreas,
  NoRehomingFound,
  TooFewFrames,
  NoTrackablePoints,
  DimensionMismatch,
  InputMismatch,
  InvalidScenario,
  InvalidConfig,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewPoints:                return "TooFewPoints";
    case ErrorCode::DegenerateConfiguration:     return "DegenerateConfiguration";
    case ErrorCode::NoModelFound:                return "NoModelFound";
    case ErrorCode::ImageTooSmall:               return "ImageTooSmall";
    case ErrorCode::EmptySet:                    return "EmptySet";
    case ErrorCode::InsufficientCorrespondences: return "InsufficientCorrespondences";
    case ErrorCode::WindowTooLarge:              return "WindowTooLarge";
    case ErrorCode::AllZeroAreas:                return "AllZeroAreas";
    case ErrorCode::NoRehomingFound:             return "NoRehomingFound";
    case ErrorCode::TooFewFrames:                return "TooFewFrames";
    case ErrorCode::NoTrackablePoints:           return "NoTrackablePoints";
    case ErrorCode::DimensionMismatch:           return "DimensionMismatch";
    case ErrorCode::InputMismatch:               return "InputMismatch";
    case ErrorCode::InvalidScenario:             return "InvalidScenario";
    case ErrorCode::InvalidConfig:               return "InvalidConfig";
    case ErrorCode::IoError:                     return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const char* code_name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace monoview
