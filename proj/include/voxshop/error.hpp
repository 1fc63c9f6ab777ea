#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voxshop {

// Machine-readable error categories. The string forms are part of the wire
// format (HTTP error bodies, replay records).
enum class ErrorCode {
  kNotFound,
  kOrdering,
  kSchema,
  kConflict,
  kInvalidGrammar,
  kUndefinedMetric,
  kRejected,
  kContractViolation,
  kIo,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kOrdering: return "ORDERING";
    case ErrorCode::kSchema: return "SCHEMA";
    case ErrorCode::kConflict: return "CONFLICT";
    case ErrorCode::kInvalidGrammar: return "INVALID_GRAMMAR";
    case ErrorCode::kUndefinedMetric: return "UNDEFINED_METRIC";
    case ErrorCode::kRejected: return "REJECTED";
    case ErrorCode::kContractViolation: return "CONTRACT_VIOLATION";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace voxshop
