#include "commerce/errors.hpp"

namespace commerce {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kTransport: return "transport_error";
    case ErrorCode::kGeneration: return "generation_error";
    case ErrorCode::kPipeline: return "pipeline_error";
    case ErrorCode::kGrounding: return "grounding_error";
    case ErrorCode::kIndexMismatch: return "index_mismatch";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "internal_error";
}

}  // namespace commerce
