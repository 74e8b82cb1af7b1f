#include "scichat/store/records.hpp"

#include <string>

#include "scichat/common/error.hpp"

namespace scichat {

std::string_view to_string(ImageKind kind) { return kind == ImageKind::kFigure ? "figure" : "raw"; }

ImageKind parse_image_kind(std::string_view text) {
  if (text == "figure") return ImageKind::kFigure;
  if (text == "raw") return ImageKind::kRaw;
  throw Error(ErrorCode::kInvalidArgument, "unknown image kind: " + std::string(text));
}

std::string_view to_string(JudgeKind judge) { return judge == JudgeKind::kLlm ? "llm" : "oracle"; }

JudgeKind parse_judge_kind(std::string_view text) {
  if (text == "llm") return JudgeKind::kLlm;
  if (text == "oracle") return JudgeKind::kOracle;
  throw Error(ErrorCode::kInvalidArgument, "unknown judge kind: " + std::string(text));
}

}  // namespace scichat
