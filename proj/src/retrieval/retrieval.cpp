#include "scichat/retrieval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "scichat/common/error.hpp"
#include "scichat/kernels/scoring.hpp"

namespace scichat {
namespace {

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

double checked_query_norm(std::span<const float> query, SimilarityMeasure measure) {
  if (measure != SimilarityMeasure::kCosine) return 0.0;
  const double norm = std::sqrt(kernels::squared_norm(query));
  if (norm == 0.0) throw Error(ErrorCode::kDomain, "cosine similarity of a zero vector is undefined");
  return norm;
}

}  // namespace

double similarity(std::span<const float> a, std::span<const float> b, SimilarityMeasure measure) {
  check_dims(a.size(), b.size());
  const double a_norm = checked_query_norm(a, measure);
  double score = 0.0;
  kernels::score_rows_serial(a, a_norm, b, b.size(), measure, std::span<double>(&score, 1));
  if (std::isnan(score)) throw Error(ErrorCode::kDomain, "cosine similarity of a zero vector is undefined");
  return score;
}

double similarity(const EmbeddingVector& a, const EmbeddingVector& b, SimilarityMeasure measure) {
  return similarity(std::span<const float>(a.values), std::span<const float>(b.values), measure);
}

std::vector<RetrievalHit> top_k(std::span<const float> query, const EmbeddingMatrix& matrix,
                                std::size_t k, SimilarityMeasure measure, const RowExclusion& exclude,
                                kernels::Backend backend) {
  if (matrix.empty()) return {};
  check_dims(query.size(), matrix.dim);
  const double query_norm = checked_query_norm(query, measure);
  if (k == 0) return {};

  std::vector<double> scores(matrix.rows());
  kernels::score_rows(backend, query, query_norm, matrix.data, matrix.dim, measure, scores);

  std::vector<std::size_t> eligible;
  eligible.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) continue;
    if (exclude && exclude(matrix.row_ids[i])) continue;
    eligible.push_back(i);
  }

  const auto before = [&](std::size_t a, std::size_t b) {
    return ranks_before(measure, scores[a], matrix.row_ids[a], scores[b], matrix.row_ids[b]);
  };
  const std::size_t take = std::min(k, eligible.size());
  std::partial_sort(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(take),
                    eligible.end(), before);

  std::vector<RetrievalHit> hits;
  hits.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const auto i = eligible[r];
    hits.push_back({matrix.row_ids[i], scores[i], r + 1});
  }
  return hits;
}

std::vector<RetrievalHit> top_k(const EmbeddingVector& query, const EmbeddingMatrix& matrix,
                                std::size_t k, SimilarityMeasure measure, const RowExclusion& exclude,
                                kernels::Backend backend) {
  return top_k(std::span<const float>(query.values), matrix, k, measure, exclude, backend);
}

}  // namespace scichat
