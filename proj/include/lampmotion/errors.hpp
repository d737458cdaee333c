/**
 * @file errors.hpp
 * @brief Error types shared by every lampmotion module.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lampmotion {

enum class ErrorCode {
  InvalidInput,
  Unreachable,
  TargetMissing,
  Infeasible,
  UnknownScenario,
  InvalidConfig,
  UnsupportedVersion,
  InvariantViolation,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::Unreachable: return "unreachable";
    case ErrorCode::TargetMissing: return "target_missing";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::UnknownScenario: return "unknown_scenario";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::UnsupportedVersion: return "unsupported_version";
    case ErrorCode::InvariantViolation: return "invariant_violation";
  }
  return "unknown";
}

class MotionError : public std::runtime_error {
 public:
  MotionError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw MotionError(code, what);
}

}  // namespace lampmotion
