#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "scichat/embedding/text_embedder.hpp"
#include "scichat/retrieval/retrieval.hpp"

using namespace scichat;

namespace {

constexpr SimilarityMeasure kAll[] = {SimilarityMeasure::kCosine, SimilarityMeasure::kEuclidean,
                                      SimilarityMeasure::kDot};

oracle::Measure as_oracle(SimilarityMeasure m) {
  switch (m) {
    case SimilarityMeasure::kCosine: return oracle::Measure::kCosine;
    case SimilarityMeasure::kEuclidean: return oracle::Measure::kEuclidean;
    case SimilarityMeasure::kDot: return oracle::Measure::kDot;
  }
  return oracle::Measure::kDot;
}

EmbeddingMatrix build(const std::vector<std::vector<float>>& rows, const std::vector<std::int64_t>& ids) {
  EmbeddingMatrix m;
  m.row_ids = ids;
  m.dim = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
  m.model_id = "t";
  return m;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("similarity examples") {
  const std::vector<float> v = {0.3f, -1.2f, 4.0f};
  CHECK(similarity(v, v, SimilarityMeasure::kCosine) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(similarity(std::vector<float>{1, 0}, std::vector<float>{0, 1}, SimilarityMeasure::kCosine) == 0.0);
  CHECK(similarity(std::vector<float>{1, 2, 2}, std::vector<float>{2, 1, 2}, SimilarityMeasure::kCosine) ==
        doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(similarity(std::vector<float>{0, 0}, std::vector<float>{3, 4}, SimilarityMeasure::kEuclidean) == 5.0);
  CHECK(similarity(std::vector<float>{1, 2}, std::vector<float>{3, 4}, SimilarityMeasure::kDot) == 11.0);
  CHECK(similarity(v, v, SimilarityMeasure::kEuclidean) == 0.0);
}

TEST_CASE("similarity errors") {
  const std::vector<float> a = {1, 2}, b = {1, 2, 3}, z = {0, 0};
  CHECK(code_of([&] { similarity(a, b, SimilarityMeasure::kDot); }) == ErrorCode::kDimensionMismatch);
  CHECK(code_of([&] { similarity(z, a, SimilarityMeasure::kCosine); }) == ErrorCode::kDomain);
  CHECK(code_of([&] { similarity(a, z, SimilarityMeasure::kCosine); }) == ErrorCode::kDomain);
  CHECK(similarity(z, a, SimilarityMeasure::kDot) == 0.0);
  const auto m = build({{1, 2, 3}}, {1});
  CHECK(code_of([&] { top_k(a, m, 1, SimilarityMeasure::kDot); }) == ErrorCode::kDimensionMismatch);
  CHECK(code_of([&] { top_k(std::vector<float>{0, 0, 0}, m, 1, SimilarityMeasure::kCosine); }) == ErrorCode::kDomain);
}

TEST_CASE("top_k matches the naive oracle exactly") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(301), dim = 1 + rng.uniform_index(41);
    std::vector<std::vector<float>> rows;
    std::vector<std::int64_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(testing::random_vector(rng, dim));
      ids.push_back(static_cast<std::int64_t>(rng.uniform_index(1000001)) * 3 + static_cast<std::int64_t>(i % 3));
    }
    // Plant exact ties: duplicate rows under different ids.
    for (std::size_t i = 0; i + 1 < n; i += 7) rows[i + 1] = rows[i];
    const auto m = build(rows, ids);
    const auto q = testing::random_vector(rng, dim);
    for (const auto measure : kAll) {
      for (const std::size_t k : {std::size_t{1}, std::size_t{5}, n, n + 10}) {
        const auto expected = oracle::naive_rank(q, rows, ids, as_oracle(measure), k);
        for (const auto backend : {kernels::Backend::kSerial, kernels::Backend::kParallel}) {
          const auto got = top_k(q, m, k, measure, {}, backend);
          REQUIRE(got.size() == expected.size());
          for (std::size_t r = 0; r < got.size(); ++r) {
            CHECK(got[r].row_id == expected[r].first);
            CHECK(got[r].score == expected[r].second);
            CHECK(got[r].rank == r + 1);
          }
        }
      }
    }
  }
}

TEST_CASE("ties go to the lower row id") {
  const auto m = build({{1, 0}, {1, 0}, {1, 0}, {0, 1}}, {30, 10, 20, 5});
  for (const auto measure : kAll) {
    const auto hits = top_k(std::vector<float>{1, 0}, m, 3, measure);
    CHECK(hits[0].row_id == 10);
    CHECK(hits[1].row_id == 20);
    CHECK(hits[2].row_id == 30);
  }
}

TEST_CASE("top_k edge cases") {
  const auto m = build({{1, 0}, {0, 1}}, {1, 2});
  CHECK(top_k(std::vector<float>{1, 0}, m, 0, SimilarityMeasure::kDot).empty());
  CHECK(top_k(std::vector<float>{1, 0}, EmbeddingMatrix{}, 3, SimilarityMeasure::kCosine).empty());
  CHECK(top_k(std::vector<float>{1, 0}, m, 10, SimilarityMeasure::kDot).size() == 2);
  const auto excluded = top_k(std::vector<float>{1, 0}, m, 10, SimilarityMeasure::kDot,
                              [](std::int64_t id) { return id == 1; });
  REQUIRE(excluded.size() == 1);
  CHECK(excluded[0].row_id == 2);
  CHECK(excluded[0].rank == 1);
  // A zero row has no cosine score and is skipped; other measures keep it.
  const auto zeros = build({{0, 0}, {1, 1}}, {1, 2});
  CHECK(top_k(std::vector<float>{1, 0}, zeros, 5, SimilarityMeasure::kCosine).size() == 1);
  CHECK(top_k(std::vector<float>{1, 0}, zeros, 5, SimilarityMeasure::kEuclidean).size() == 2);
}

TEST_CASE("cosine ranking is scale invariant and top-k is a prefix") {
  Rng rng(5);
  std::vector<std::vector<float>> rows;
  std::vector<std::int64_t> ids;
  for (int i = 0; i < 200; ++i) {
    rows.push_back(testing::random_vector(rng, 16));
    ids.push_back(i);
  }
  const auto m = build(rows, ids);
  const auto q = testing::random_vector(rng, 16);
  auto scaled = q;
  for (auto& x : scaled) x *= 8.0f;  // power of two keeps the arithmetic exact
  const auto a = top_k(q, m, 50, SimilarityMeasure::kCosine);
  const auto b = top_k(scaled, m, 50, SimilarityMeasure::kCosine);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].row_id == b[i].row_id);
  for (const auto measure : kAll) {
    const auto full = top_k(q, m, 200, measure);
    for (const std::size_t k : {1, 7, 30, 199}) {
      const auto part = top_k(q, m, k, measure);
      for (std::size_t i = 0; i < k; ++i) CHECK(part[i] == full[i]);
    }
  }
}

TEST_CASE("on unit vectors cosine and euclidean orders coincide") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<float>> rows;
    std::vector<std::int64_t> ids;
    for (int i = 0; i < 100; ++i) {
      rows.push_back(mock_embed("r" + std::to_string(trial) + "-" + std::to_string(i), 64).values);
      ids.push_back(i);
    }
    const auto m = build(rows, ids);
    const auto q = mock_embed("q" + std::to_string(trial), 64).values;
    const auto c = top_k(q, m, 100, SimilarityMeasure::kCosine);
    const auto e = top_k(q, m, 100, SimilarityMeasure::kEuclidean);
    for (std::size_t i = 0; i < 100; ++i) CHECK(c[i].row_id == e[i].row_id);
  }
}

TEST_CASE("measure names parse and print") {
  for (const auto measure : kAll) CHECK(parse_measure(to_string(measure)) == measure);
  CHECK(parse_measure("euclidean") == SimilarityMeasure::kEuclidean);
  CHECK_THROWS_AS(parse_measure("manhattan"), Error);
}
