#include "scichat/kernels/measure.hpp"

#include <string>

#include "scichat/common/error.hpp"

namespace scichat {

std::string_view to_string(SimilarityMeasure measure) {
  switch (measure) {
    case SimilarityMeasure::kCosine: return "cosine";
    case SimilarityMeasure::kEuclidean: return "euclidean";
    case SimilarityMeasure::kDot: return "dot";
  }
  return "cosine";
}

SimilarityMeasure parse_measure(std::string_view text) {
  if (text == "cosine") return SimilarityMeasure::kCosine;
  if (text == "euclidean" || text == "euclidian") return SimilarityMeasure::kEuclidean;
  if (text == "dot") return SimilarityMeasure::kDot;
  throw Error(ErrorCode::kInvalidArgument, "unknown similarity measure: " + std::string(text));
}

}  // namespace scichat
