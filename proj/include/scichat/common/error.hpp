#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scichat {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kEmptyDocument,
  kFormat,
  kLength,
  kSchema,
  kIntegrity,
  kNotFound,
  kDimensionMismatch,
  kDomain,
  kBudget,
  kProviderPermanent,
  kProviderTransient,
  kJudgment,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Malformed XML or other structured input; offset is a byte index into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(ErrorCode::kParse, message + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Raised by remote providers. status is the HTTP status, or 0 for transport failures.
class ProviderError : public Error {
 public:
  ProviderError(ErrorCode code, const std::string& message, int status = 0,
                std::optional<std::size_t> item_index = std::nullopt)
      : Error(code, message), status_(status), item_index_(item_index) {}

  int status() const noexcept { return status_; }
  std::optional<std::size_t> item_index() const noexcept { return item_index_; }
  bool transient() const noexcept { return code() == ErrorCode::kProviderTransient; }

 private:
  int status_;
  std::optional<std::size_t> item_index_;
};

inline ProviderError transient_error(const std::string& message, int status = 0) {
  return ProviderError(ErrorCode::kProviderTransient, message, status);
}

inline ProviderError permanent_error(const std::string& message, int status = 0) {
  return ProviderError(ErrorCode::kProviderPermanent, message, status);
}

// 429 and 5xx are worth retrying, other 4xx are not.
inline bool is_retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace scichat
