#pragma once

#include <cstddef>
#include <span>

#include "scichat/kernels/backend.hpp"
#include "scichat/kernels/measure.hpp"

namespace scichat::kernels {

// Scores each row of a row-major `rows` block (rows.size() / dim rows) against
// `query`, accumulating in double. Under cosine a zero-norm row scores NaN.
// `query_norm` is only read for cosine.
void score_rows_serial(std::span<const float> query, double query_norm,
                       std::span<const float> rows, std::size_t dim, SimilarityMeasure measure,
                       std::span<double> out);

void score_rows_parallel(std::span<const float> query, double query_norm,
                         std::span<const float> rows, std::size_t dim, SimilarityMeasure measure,
                         std::span<double> out);

inline void score_rows(Backend backend, std::span<const float> query, double query_norm,
                       std::span<const float> rows, std::size_t dim, SimilarityMeasure measure,
                       std::span<double> out) {
  if (backend == Backend::kSerial) {
    score_rows_serial(query, query_norm, rows, dim, measure, out);
  } else {
    score_rows_parallel(query, query_norm, rows, dim, measure, out);
  }
}

double dot(std::span<const float> a, std::span<const float> b);
double squared_norm(std::span<const float> a);

}  // namespace scichat::kernels
