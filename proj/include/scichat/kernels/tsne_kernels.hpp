#pragma once

#include <cstddef>
#include <span>

#include "scichat/kernels/backend.hpp"

namespace scichat::kernels {

// n x n squared Euclidean distances of the rows of a row-major n x dim matrix.
void squared_distances_serial(std::span<const double> x, std::size_t n, std::size_t dim,
                              std::span<double> out);
void squared_distances_parallel(std::span<const double> x, std::size_t n, std::size_t dim,
                                std::span<double> out);

// Gradient of KL(P || Q) with respect to the 2-D embedding y (n x 2, row-major)
// for exact t-SNE; p is the symmetric joint affinity matrix scaled by
// `exaggeration`. Returns Z, the sum of the Student-t kernel over i != j.
// Per-row sums are reduced in row order, so both variants agree bit for bit.
double tsne_gradient_serial(std::span<const double> p, std::span<const double> y, std::size_t n,
                            double exaggeration, std::span<double> grad);
double tsne_gradient_parallel(std::span<const double> p, std::span<const double> y,
                              std::size_t n, double exaggeration, std::span<double> grad);

double tsne_kl_divergence(std::span<const double> p, std::span<const double> y, std::size_t n);

inline void squared_distances(Backend backend, std::span<const double> x, std::size_t n,
                              std::size_t dim, std::span<double> out) {
  if (backend == Backend::kSerial) {
    squared_distances_serial(x, n, dim, out);
  } else {
    squared_distances_parallel(x, n, dim, out);
  }
}

inline double tsne_gradient(Backend backend, std::span<const double> p, std::span<const double> y,
                            std::size_t n, double exaggeration, std::span<double> grad) {
  return backend == Backend::kSerial ? tsne_gradient_serial(p, y, n, exaggeration, grad)
                                     : tsne_gradient_parallel(p, y, n, exaggeration, grad);
}

}  // namespace scichat::kernels
