#include "scichat/kernels/scoring.hpp"

#include <omp.h>

#include <cmath>
#include <limits>

namespace scichat::kernels {
namespace {

inline double score_one(const float* query, double query_norm, const float* row, std::size_t dim,
                        SimilarityMeasure measure) {
  switch (measure) {
    case SimilarityMeasure::kDot: {
      double sum = 0.0;
      for (std::size_t i = 0; i < dim; ++i) sum += static_cast<double>(query[i]) * row[i];
      return sum;
    }
    case SimilarityMeasure::kEuclidean: {
      double sum = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = static_cast<double>(query[i]) - row[i];
        sum += d * d;
      }
      return std::sqrt(sum);
    }
    case SimilarityMeasure::kCosine: {
      double dot = 0.0;
      double norm = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        dot += static_cast<double>(query[i]) * row[i];
        norm += static_cast<double>(row[i]) * row[i];
      }
      if (norm == 0.0) return std::numeric_limits<double>::quiet_NaN();
      return dot / (query_norm * std::sqrt(norm));
    }
  }
  return 0.0;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void score_rows_serial(std::span<const float> query, double query_norm,
                       std::span<const float> rows, std::size_t dim, SimilarityMeasure measure,
                       std::span<double> out) {
  const std::size_t count = dim == 0 ? 0 : rows.size() / dim;
  for (std::size_t r = 0; r < count; ++r) {
    out[r] = score_one(query.data(), query_norm, rows.data() + r * dim, dim, measure);
  }
}

void score_rows_parallel(std::span<const float> query, double query_norm,
                         std::span<const float> rows, std::size_t dim, SimilarityMeasure measure,
                         std::span<double> out) {
  const auto count = static_cast<std::ptrdiff_t>(dim == 0 ? 0 : rows.size() / dim);
  const float* q = query.data();
  const float* base = rows.data();
  double* result = out.data();
#pragma omp parallel for schedule(static) if (count > 256)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    result[r] = score_one(q, query_norm, base + static_cast<std::size_t>(r) * dim, dim, measure);
  }
}

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * b[i];
  return sum;
}

double squared_norm(std::span<const float> a) { return dot(a, a); }

}  // namespace scichat::kernels
