#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "scichat/embedding/vector.hpp"
#include "scichat/kernels/backend.hpp"
#include "scichat/kernels/measure.hpp"
#include "scichat/store/matrix.hpp"

namespace scichat {

struct RetrievalHit {
  std::int64_t row_id = 0;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based

  bool operator==(const RetrievalHit&) const = default;
};

// Returns true for rows that must not appear in the result.
using RowExclusion = std::function<bool(std::int64_t row_id)>;

// Throws Error(kDimensionMismatch) on unequal dims and Error(kDomain) for a
// zero vector under cosine.
double similarity(std::span<const float> a, std::span<const float> b, SimilarityMeasure measure);
double similarity(const EmbeddingVector& a, const EmbeddingVector& b, SimilarityMeasure measure);

// True when score a ranks ahead of score b; ties go to the lower row id.
inline bool ranks_before(SimilarityMeasure measure, double a, std::int64_t id_a, double b,
                         std::int64_t id_b) {
  if (a != b) return higher_is_better(measure) ? a > b : a < b;
  return id_a < id_b;
}

// Exact full-scan top-k. Rows whose cosine score is undefined (zero norm) are
// never returned.
std::vector<RetrievalHit> top_k(std::span<const float> query, const EmbeddingMatrix& matrix,
                                std::size_t k, SimilarityMeasure measure,
                                const RowExclusion& exclude = {},
                                kernels::Backend backend = kernels::Backend::kParallel);

std::vector<RetrievalHit> top_k(const EmbeddingVector& query, const EmbeddingMatrix& matrix,
                                std::size_t k, SimilarityMeasure measure,
                                const RowExclusion& exclude = {},
                                kernels::Backend backend = kernels::Backend::kParallel);

}  // namespace scichat
