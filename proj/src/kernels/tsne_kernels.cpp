#include "scichat/kernels/tsne_kernels.hpp"

#include <cmath>
#include <vector>

namespace scichat::kernels {
namespace {

inline double row_distance(const double* a, const double* b, std::size_t dim) {
  double sum = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return sum;
}

inline double kernel_row_sum(const double* y, std::size_t n, std::size_t i) {
  double sum = 0.0;
  const double yi0 = y[2 * i];
  const double yi1 = y[2 * i + 1];
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double d0 = yi0 - y[2 * j];
    const double d1 = yi1 - y[2 * j + 1];
    sum += 1.0 / (1.0 + d0 * d0 + d1 * d1);
  }
  return sum;
}

inline void gradient_row(const double* p, const double* y, std::size_t n, std::size_t i,
                         double exaggeration, double inv_z, double* grad) {
  double g0 = 0.0;
  double g1 = 0.0;
  const double yi0 = y[2 * i];
  const double yi1 = y[2 * i + 1];
  const double* p_row = p + i * n;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double d0 = yi0 - y[2 * j];
    const double d1 = yi1 - y[2 * j + 1];
    const double num = 1.0 / (1.0 + d0 * d0 + d1 * d1);
    const double mult = (exaggeration * p_row[j] - num * inv_z) * num;
    g0 += mult * d0;
    g1 += mult * d1;
  }
  grad[2 * i] = 4.0 * g0;
  grad[2 * i + 1] = 4.0 * g1;
}

}  // namespace

void squared_distances_serial(std::span<const double> x, std::size_t n, std::size_t dim,
                              std::span<double> out) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] = i == j ? 0.0 : row_distance(x.data() + i * dim, x.data() + j * dim, dim);
    }
  }
}

void squared_distances_parallel(std::span<const double> x, std::size_t n, std::size_t dim,
                                std::span<double> out) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  const double* data = x.data();
  double* result = out.data();
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t si = 0; si < count; ++si) {
    const auto i = static_cast<std::size_t>(si);
    for (std::size_t j = 0; j < n; ++j) {
      result[i * n + j] = i == j ? 0.0 : row_distance(data + i * dim, data + j * dim, dim);
    }
  }
}

double tsne_gradient_serial(std::span<const double> p, std::span<const double> y, std::size_t n,
                            double exaggeration, std::span<double> grad) {
  std::vector<double> row_sums(n);
  for (std::size_t i = 0; i < n; ++i) row_sums[i] = kernel_row_sum(y.data(), n, i);
  double z = 0.0;
  for (const double s : row_sums) z += s;
  const double inv_z = 1.0 / z;
  for (std::size_t i = 0; i < n; ++i) {
    gradient_row(p.data(), y.data(), n, i, exaggeration, inv_z, grad.data());
  }
  return z;
}

double tsne_gradient_parallel(std::span<const double> p, std::span<const double> y,
                              std::size_t n, double exaggeration, std::span<double> grad) {
  std::vector<double> row_sums(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  const double* yd = y.data();
  double* sums = row_sums.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    sums[i] = kernel_row_sum(yd, n, static_cast<std::size_t>(i));
  }
  double z = 0.0;
  for (const double s : row_sums) z += s;
  const double inv_z = 1.0 / z;
  const double* pd = p.data();
  double* gd = grad.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    gradient_row(pd, yd, n, static_cast<std::size_t>(i), exaggeration, inv_z, gd);
  }
  return z;
}

double tsne_kl_divergence(std::span<const double> p, std::span<const double> y, std::size_t n) {
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += kernel_row_sum(y.data(), n, i);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double pij = p[i * n + j];
      if (pij <= 0.0) continue;
      const double d0 = y[2 * i] - y[2 * j];
      const double d1 = y[2 * i + 1] - y[2 * j + 1];
      const double q = (1.0 / (1.0 + d0 * d0 + d1 * d1)) / z;
      kl += pij * std::log(pij / q);
    }
  }
  return kl;
}

}  // namespace scichat::kernels
