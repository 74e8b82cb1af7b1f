#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "scichat/common/rng.hpp"
#include "scichat/kernels/scoring.hpp"
#include "scichat/kernels/tsne_kernels.hpp"
#include "scichat/retrieval/retrieval.hpp"

namespace {

using scichat::kernels::Backend;
using scichat::SimilarityMeasure;

std::vector<float> random_floats(std::size_t count, std::uint64_t seed) {
  scichat::Rng rng(seed);
  std::vector<float> out(count);
  for (auto& v : out) v = static_cast<float>(rng.normal());
  return out;
}

// rows x 1536, as in a corpus of ada-002 chunk vectors.
void BM_ScoreRows(benchmark::State& state, Backend backend, SimilarityMeasure measure) {
  constexpr std::size_t dim = 1536;
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto data = random_floats(rows * dim, 1);
  const auto query = random_floats(dim, 2);
  const double qn = std::sqrt(scichat::kernels::squared_norm(query));
  std::vector<double> out(rows);
  for (auto _ : state) {
    scichat::kernels::score_rows(backend, query, qn, data, dim, measure, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * rows * dim * sizeof(float)));
}

void BM_TopK(benchmark::State& state, Backend backend) {
  constexpr std::size_t dim = 1536;
  const auto rows = static_cast<std::size_t>(state.range(0));
  scichat::EmbeddingMatrix m;
  m.dim = dim;
  m.data = random_floats(rows * dim, 3);
  for (std::size_t i = 0; i < rows; ++i) m.row_ids.push_back(static_cast<std::int64_t>(i));
  const auto query = random_floats(dim, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scichat::top_k(std::span<const float>(query), m, 10, SimilarityMeasure::kCosine, {}, backend));
  }
}

std::vector<double> random_affinities(std::size_t n) {
  scichat::Rng rng(5);
  std::vector<double> p(n * n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rng.uniform01();
      p[i * n + j] = p[j * n + i] = v;
      sum += 2.0 * v;
    }
  }
  for (auto& v : p) v /= sum;
  return p;
}

void BM_TsneGradient(benchmark::State& state, Backend backend) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = random_affinities(n);
  scichat::Rng rng(6);
  std::vector<double> y(2 * n);
  for (auto& v : y) v = rng.normal();
  std::vector<double> grad(2 * n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scichat::kernels::tsne_gradient(backend, p, y, n, 1.0, grad));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

void BM_SquaredDistances(benchmark::State& state, Backend backend) {
  const auto n = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t dim = 64;
  scichat::Rng rng(7);
  std::vector<double> x(n * dim);
  for (auto& v : x) v = rng.normal();
  std::vector<double> out(n * n);
  for (auto _ : state) {
    scichat::kernels::squared_distances(backend, x, n, dim, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_ScoreRows, cosine_serial, Backend::kSerial, SimilarityMeasure::kCosine)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(BM_ScoreRows, cosine_parallel, Backend::kParallel, SimilarityMeasure::kCosine)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(BM_ScoreRows, euclidean_serial, Backend::kSerial, SimilarityMeasure::kEuclidean)->Arg(10000);
BENCHMARK_CAPTURE(BM_ScoreRows, euclidean_parallel, Backend::kParallel, SimilarityMeasure::kEuclidean)->Arg(10000);
BENCHMARK_CAPTURE(BM_TopK, serial, Backend::kSerial)->Arg(6157);
BENCHMARK_CAPTURE(BM_TopK, parallel, Backend::kParallel)->Arg(6157);
BENCHMARK_CAPTURE(BM_TsneGradient, serial, Backend::kSerial)->Arg(500)->Arg(2000);
BENCHMARK_CAPTURE(BM_TsneGradient, parallel, Backend::kParallel)->Arg(500)->Arg(2000);
BENCHMARK_CAPTURE(BM_SquaredDistances, serial, Backend::kSerial)->Arg(1000);
BENCHMARK_CAPTURE(BM_SquaredDistances, parallel, Backend::kParallel)->Arg(1000);

BENCHMARK_MAIN();
