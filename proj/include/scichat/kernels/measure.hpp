#pragma once

#include <string>
#include <string_view>

namespace scichat {

enum class SimilarityMeasure { kCosine, kEuclidean, kDot };

std::string_view to_string(SimilarityMeasure measure);
SimilarityMeasure parse_measure(std::string_view text);

// Cosine and dot rank descending; euclidean distance ranks ascending.
constexpr bool higher_is_better(SimilarityMeasure measure) {
  return measure != SimilarityMeasure::kEuclidean;
}

}  // namespace scichat
