#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace synthuser {

enum class ErrorCode {
  invalid_id,
  parse,
  sequencing,
  io,
  integrity,
  model,
  unavailable_action,
  invalid_kind,
  divergence,
  dead_end,
  tracking,
  config,
  validation,
  run,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_id: return "invalid-id";
    case ErrorCode::parse: return "parse";
    case ErrorCode::sequencing: return "sequencing";
    case ErrorCode::io: return "io";
    case ErrorCode::integrity: return "integrity";
    case ErrorCode::model: return "model";
    case ErrorCode::unavailable_action: return "unavailable-action";
    case ErrorCode::invalid_kind: return "invalid-kind";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::dead_end: return "dead-end";
    case ErrorCode::tracking: return "tracking";
    case ErrorCode::config: return "config";
    case ErrorCode::validation: return "validation";
    case ErrorCode::run: return "run";
  }
  return "unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + " error: " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace synthuser
