#include "scichat/common/error.hpp"

namespace scichat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kEmptyDocument: return "empty_document";
    case ErrorCode::kFormat: return "format_error";
    case ErrorCode::kLength: return "length_error";
    case ErrorCode::kSchema: return "schema_error";
    case ErrorCode::kIntegrity: return "integrity_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDomain: return "domain_error";
    case ErrorCode::kBudget: return "budget_error";
    case ErrorCode::kProviderPermanent: return "provider_error";
    case ErrorCode::kProviderTransient: return "provider_unavailable";
    case ErrorCode::kJudgment: return "judgment_error";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

}  // namespace scichat
