#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "scichat/kernels/backend.hpp"
#include "scichat/store/matrix.hpp"

namespace scichat {

struct TsneOptions {
  double perplexity = 40.0;
  std::size_t iterations = 10000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch_iteration = 250;
  double min_gain = 0.01;
  // Over this trailing fraction of the run a step that would raise KL is
  // undone; momentum and gains reset and a halving plain-gradient step is
  // tried instead. Costs one extra KL evaluation per guarded iteration.
  double monotone_tail = 0.5;
  // Record the KL divergence every this many iterations (0 disables).
  std::size_t kl_every = 0;
  kernels::Backend backend = kernels::Backend::kParallel;
};

struct TsneResult {
  std::size_t n = 0;
  std::vector<double> coords;                // n x 2, row-major
  std::vector<double> achieved_perplexity;   // per point
  std::vector<std::pair<std::size_t, double>> kl_trace;  // (iteration, KL)
  bool low_n_warning = false;                // n < 3 * perplexity
};

// Per-row Gaussian conditionals p_{j|i} whose Shannon perplexity matches the
// target; `sq_distances` is n x n. Writes the achieved perplexity per row.
std::vector<double> conditional_affinities(std::span<const double> sq_distances, std::size_t n,
                                           double perplexity, std::vector<double>* achieved = nullptr);

// exp(H) of a probability row, natural log; zero entries contribute nothing.
double shannon_perplexity(std::span<const double> row);

// (P + P^T) / 2n, floored at 1e-12 off the diagonal.
std::vector<double> joint_affinities(std::span<const double> conditional, std::size_t n);

// Exact t-SNE to two dimensions. Throws Error(kInvalidArgument) for n < 5,
// dim < 1 or a non-positive perplexity, and Error(kDomain) for NaN/Inf input.
// Exactly coincident points are separated by 1e-10 seeded jitter.
TsneResult tsne_project(std::span<const double> data, std::size_t n, std::size_t dim,
                        const TsneOptions& options = {});
TsneResult tsne_project(const EmbeddingMatrix& matrix, const TsneOptions& options = {});

// Mean fraction of each point's k nearest 2-D neighbours that share its label.
double knn_purity(std::span<const double> coords, std::span<const int> labels, std::size_t k = 5);

// Fraction of rows (n x dim) whose nearest label centroid is their own label.
double centroid_agreement(std::span<const double> data, std::size_t dim, std::span<const int> labels);

}  // namespace scichat
