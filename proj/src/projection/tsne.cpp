#include "scichat/projection/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "scichat/common/error.hpp"
#include "scichat/common/rng.hpp"
#include "scichat/kernels/tsne_kernels.hpp"

namespace scichat {
namespace {

constexpr double kFloor = 1e-12;

// Fills row with exp(-beta * (d - d_min)), normalized; returns the entropy in nats.
double gaussian_row(std::span<const double> d, std::size_t self, double d_min, double beta,
                    std::span<double> row) {
  double sum = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    row[j] = j == self ? 0.0 : std::exp(-beta * (d[j] - d_min));
    sum += row[j];
  }
  double weighted = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    row[j] /= sum;
    weighted += row[j] * (d[j] - d_min);
  }
  return std::log(sum) + beta * weighted;
}

}  // namespace

double shannon_perplexity(std::span<const double> row) {
  double h = 0.0;
  for (const double p : row) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

std::vector<double> conditional_affinities(std::span<const double> sq_distances, std::size_t n,
                                           double perplexity, std::vector<double>* achieved) {
  if (n < 2 || perplexity <= 0.0 || perplexity > static_cast<double>(n - 1)) {
    throw Error(ErrorCode::kInvalidArgument, "perplexity must lie in (0, n - 1]");
  }
  const double target = std::log(perplexity);
  std::vector<double> p(n * n, 0.0);
  if (achieved) achieved->assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = sq_distances.subspan(i * n, n);
    const auto row = std::span<double>(p).subspan(i * n, n);
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      d_min = std::min(d_min, d[j]);
      d_max = std::max(d_max, d[j]);
    }
    // Bisection on beta; entropy falls monotonically as beta grows.
    const double spread = d_max - d_min;
    double beta = spread > 0.0 ? 1.0 / spread : 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 200; ++step) {
      const double h = gaussian_row(d, i, d_min, beta, row);
      if (std::abs(h - target) < 1e-10) break;
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
    if (achieved) (*achieved)[i] = shannon_perplexity(row);
  }
  return p;
}

std::vector<double> joint_affinities(std::span<const double> conditional, std::size_t n) {
  std::vector<double> p(n * n, 0.0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      p[i * n + j] = std::max((conditional[i * n + j] + conditional[j * n + i]) * scale, kFloor);
    }
  }
  return p;
}

TsneResult tsne_project(std::span<const double> data, std::size_t n, std::size_t dim,
                        const TsneOptions& options) {
  if (n < 5) throw Error(ErrorCode::kInvalidArgument, "t-SNE needs at least 5 points, got " + std::to_string(n));
  if (dim < 1 || data.size() != n * dim) throw Error(ErrorCode::kInvalidArgument, "data is not n x dim");
  if (options.perplexity <= 0.0) throw Error(ErrorCode::kInvalidArgument, "perplexity must be positive");
  for (const double x : data) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kDomain, "t-SNE input contains NaN or Inf");
  }

  TsneResult result;
  result.n = n;
  if (static_cast<double>(n) < 3.0 * options.perplexity) {
    result.low_n_warning = true;
    spdlog::warn("t-SNE on {} points with perplexity {}: fewer than 3 x perplexity points", n,
                 options.perplexity);
  }
  double perplexity = options.perplexity;
  if (perplexity >= static_cast<double>(n - 1)) {
    perplexity = static_cast<double>(n - 1) / 3.0;
    spdlog::warn("perplexity {} is not below n - 1; using {}", options.perplexity, perplexity);
  }

  Rng rng(options.seed);
  std::vector<double> x(data.begin(), data.end());
  std::vector<double> d(n * n);
  kernels::squared_distances(options.backend, x, n, dim, d);
  bool jittered = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (d[i * n + j] != 0.0) continue;
      for (std::size_t k = 0; k < dim; ++k) x[j * dim + k] += 1e-10 * rng.normal();
      jittered = true;
    }
  }
  if (jittered) kernels::squared_distances(options.backend, x, n, dim, d);

  const auto conditional = conditional_affinities(d, n, perplexity, &result.achieved_perplexity);
  const auto p = joint_affinities(conditional, n);
  d = {};

  auto& y = result.coords;
  y.resize(2 * n);
  for (auto& v : y) v = 1e-4 * rng.normal();
  std::vector<double> grad(2 * n, 0.0);
  std::vector<double> update(2 * n, 0.0);
  std::vector<double> gains(2 * n, 1.0);

  const double tail = std::clamp(options.monotone_tail, 0.0, 1.0);
  const std::size_t guard_from =
      options.iterations - static_cast<std::size_t>(tail * static_cast<double>(options.iterations));
  std::vector<double> previous;
  double current_kl = 0.0;
  bool have_kl = false;
  const auto recentre = [&] {
    double mean0 = 0.0;
    double mean1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean0 += y[2 * i];
      mean1 += y[2 * i + 1];
    }
    mean0 /= static_cast<double>(n);
    mean1 /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mean0;
      y[2 * i + 1] -= mean1;
    }
  };

  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    const double exaggeration = iter < options.exaggeration_iterations ? options.early_exaggeration : 1.0;
    const double momentum =
        iter < options.momentum_switch_iteration ? options.initial_momentum : options.final_momentum;
    const bool guarded = iter >= guard_from && exaggeration == 1.0;
    if (guarded && !have_kl) {
      current_kl = kernels::tsne_kl_divergence(p, y, n);
      have_kl = true;
    }
    if (guarded) previous = y;
    kernels::tsne_gradient(options.backend, p, y, n, exaggeration, grad);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const bool same_sign = (grad[k] > 0.0) == (update[k] > 0.0);
      gains[k] = same_sign ? gains[k] * 0.8 : gains[k] + 0.2;
      gains[k] = std::max(gains[k], options.min_gain);
      update[k] = momentum * update[k] - options.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    recentre();
    if (guarded) {
      double kl = kernels::tsne_kl_divergence(p, y, n);
      if (kl > current_kl) {
        std::fill(update.begin(), update.end(), 0.0);
        std::fill(gains.begin(), gains.end(), 1.0);
        double step = options.learning_rate;
        bool accepted = false;
        for (int tries = 0; tries < 40 && !accepted; ++tries, step *= 0.5) {
          for (std::size_t k = 0; k < 2 * n; ++k) y[k] = previous[k] - step * grad[k];
          recentre();
          kl = kernels::tsne_kl_divergence(p, y, n);
          accepted = kl <= current_kl;
        }
        if (!accepted) {
          y = previous;
          kl = current_kl;
        }
      }
      current_kl = kl;
    } else {
      have_kl = false;
    }
    if (options.kl_every > 0 && ((iter + 1) % options.kl_every == 0 || iter + 1 == options.iterations)) {
      result.kl_trace.emplace_back(iter + 1, guarded ? current_kl : kernels::tsne_kl_divergence(p, y, n));
    }
  }
  return result;
}

TsneResult tsne_project(const EmbeddingMatrix& matrix, const TsneOptions& options) {
  std::vector<double> data(matrix.data.begin(), matrix.data.end());
  return tsne_project(data, matrix.rows(), matrix.dim, options);
}

double knn_purity(std::span<const double> coords, std::span<const int> labels, std::size_t k) {
  const std::size_t n = labels.size();
  if (coords.size() != 2 * n) throw Error(ErrorCode::kInvalidArgument, "coords and labels differ in length");
  if (n < 2 || k == 0) return 1.0;
  k = std::min(k, n - 1);
  double total = 0.0;
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d0 = coords[2 * i] - coords[2 * j];
      const double d1 = coords[2 * i + 1] - coords[2 * j + 1];
      dist.emplace_back(d0 * d0 + d1 * d1, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::size_t same = 0;
    for (std::size_t m = 0; m < k; ++m) same += labels[dist[m].second] == labels[i] ? 1 : 0;
    total += static_cast<double>(same) / static_cast<double>(k);
  }
  return total / static_cast<double>(n);
}

double centroid_agreement(std::span<const double> data, std::size_t dim, std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (dim == 0 || data.size() != n * dim) throw Error(ErrorCode::kInvalidArgument, "data is not n x dim");
  if (n == 0) return 1.0;
  std::map<int, std::pair<std::vector<double>, std::size_t>> centroids;
  for (std::size_t i = 0; i < n; ++i) {
    auto& [sum, count] = centroids[labels[i]];
    sum.resize(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) sum[k] += data[i * dim + k];
    ++count;
  }
  for (auto& [label, entry] : centroids) {
    for (auto& v : entry.first) v /= static_cast<double>(entry.second);
  }
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int best = labels[i];
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [label, entry] : centroids) {
      double d = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = data[i * dim + k] - entry.first[k];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = label;
      }
    }
    agree += best == labels[i] ? 1 : 0;
  }
  return static_cast<double>(agree) / static_cast<double>(n);
}

}  // namespace scichat
