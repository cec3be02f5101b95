#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace commerce {

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kIo,
  kParse,
  kValidation,
  kTransport,
  kGeneration,
  kPipeline,
  kGrounding,
  kIndexMismatch,
  kUnauthorized,
  kInternal,
};

// Stable snake_case name used in logs and in HTTP error bodies.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string trace_id = {})
      : std::runtime_error(message), code_(code), trace_id_(std::move(trace_id)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& trace_id() const noexcept { return trace_id_; }
  void set_trace_id(std::string trace_id) { trace_id_ = std::move(trace_id); }

 private:
  ErrorCode code_;
  std::string trace_id_;
};

// Structured output that could not be parsed or did not match its schema, even
// after the repair round and fallback extraction. Keeps the raw model text so the
// failure can be audited.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::vector<std::string> violations,
                  std::string raw_text = {})
      : Error(ErrorCode::kValidation, message),
        violations_(std::move(violations)),
        raw_text_(std::move(raw_text)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }
  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::vector<std::string> violations_;
  std::string raw_text_;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& message, bool retriable)
      : Error(ErrorCode::kTransport, message), retriable_(retriable) {}

  bool retriable() const noexcept { return retriable_; }

 private:
  bool retriable_;
};

}  // namespace commerce
