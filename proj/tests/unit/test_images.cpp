#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "scichat/common/error.hpp"
#include "scichat/embedding/image_embedder.hpp"
#include "scichat/images/image_search.hpp"
#include "scichat/store/matrix_cache.hpp"

using namespace scichat;

namespace {

std::string png(const std::string& body) { return std::string("\x89PNG\r\n\x1a\n", 8) + body; }

struct Fixture {
  std::unique_ptr<DocumentStore> store = open_sqlite_store(":memory:");
  MatrixCache matrices{*store};
  MockImageEmbedder embedder{16};
  ImageSearch search{*store, matrices, embedder.model_id()};
  testing::TempDir dir;

  std::filesystem::path write(const std::string& rel, const std::string& bytes) {
    const auto p = dir / rel;
    std::filesystem::create_directories(p.parent_path());
    testing::spit(p, bytes);
    return p;
  }
};

oracle::Measure as_oracle(SimilarityMeasure m) {
  return m == SimilarityMeasure::kCosine      ? oracle::Measure::kCosine
         : m == SimilarityMeasure::kEuclidean ? oracle::Measure::kEuclidean
                                              : oracle::Measure::kDot;
}

}  // namespace

TEST_CASE("ingest counts and per-item failures") {
  Fixture f;
  std::vector<std::filesystem::path> paths = {f.write("exp1/a.png", png("a")), f.write("exp1/b.png", png("b")),
                                              f.write("exp2/c.png", png("c"))};
  ImageIngestOptions o;
  o.retry = RetryPolicy::immediate(1);
  const auto counts = ingest_images(paths, ImageKind::kRaw, [](const auto& p) { return default_group_key(p); },
                                    f.embedder, *f.store, o);
  CHECK(counts.ok == 3);
  CHECK(counts.failed == 0);
  CHECK(f.store->image_count() == 3);
  CHECK(f.store->find_image_by_path(paths[2].string())->group_key == std::optional<std::string>("exp2"));

  CHECK(ingest_images(std::span<const std::filesystem::path>{}, ImageKind::kRaw, {}, f.embedder, *f.store, o).ok == 0);

  const std::vector<std::filesystem::path> mixed = {f.write("x/bad.png", "not an image"), f.dir / "missing.png",
                                                    f.write("x/good.png", png("g"))};
  const auto c2 = ingest_images(mixed, ImageKind::kRaw, {}, f.embedder, *f.store, o);
  CHECK(c2.ok == 1);
  CHECK(c2.failed == 2);
  CHECK(c2.errors.size() == 2);
  // Re-ingesting the same path does not duplicate it.
  ingest_images(paths, ImageKind::kRaw, {}, f.embedder, *f.store, o);
  CHECK(f.store->image_count() == 4);
}

TEST_CASE("manifest round trip and validation") {
  testing::TempDir dir;
  const std::vector<ManifestEntry> entries = {
      {dir / "figs/f1.png", ImageKind::kFigure, "doc1", "Figure 1", std::nullopt, "A caption, with comma"},
      {dir / "raw/exp7/r.png", ImageKind::kRaw, std::nullopt, std::nullopt, "exp7", std::nullopt}};
  write_manifest(dir / "m.csv", entries);
  const auto back = read_manifest(dir / "m.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].caption == entries[0].caption);
  CHECK(back[0].doc_id == entries[0].doc_id);
  CHECK(back[1].group_key == std::optional<std::string>("exp7"));
  CHECK(back[1].path == entries[1].path);

  testing::spit(dir / "rel.csv", "path,kind,doc_id,figure_label,group_key,caption\nbeam3/x.png,raw,,,,\n");
  const auto rel = read_manifest(dir / "rel.csv");
  CHECK(rel[0].path == dir / "beam3/x.png");
  CHECK(rel[0].group_key == std::optional<std::string>("beam3"));
  CHECK_FALSE(rel[0].doc_id.has_value());

  const auto expect_format = [&](const std::string& content) {
    testing::spit(dir / "bad.csv", content);
    try {
      read_manifest(dir / "bad.csv");
      FAIL("expected a throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kFormat);
    }
  };
  expect_format("file,kind\nx.png,raw\n");
  expect_format("path,kind,doc_id,figure_label,group_key,caption\nx.png,photo,,,,\n");
  expect_format("path,kind,doc_id,figure_label,group_key,caption\nx.png,figure,,,,\n");
  CHECK(default_group_key("/data/beamline-12/img.tif") == "beamline-12");
}

TEST_CASE("manifest ingest keeps figure metadata") {
  Fixture f;
  const std::vector<ManifestEntry> entries = {
      {f.write("f1.png", png("fig")), ImageKind::kFigure, "doc1", "Figure 1", std::nullopt, "cap"}};
  CHECK(ingest_images(entries, f.embedder, *f.store).ok == 1);
  const auto rec = f.store->find_image_by_path(entries[0].path.string());
  REQUIRE(rec.has_value());
  CHECK(rec->kind == ImageKind::kFigure);
  CHECK(rec->doc_id == std::optional<std::string>("doc1"));
  CHECK(rec->figure_label == std::optional<std::string>("Figure 1"));
  CHECK(rec->caption == std::optional<std::string>("cap"));
}

TEST_CASE("search by id excludes itself; duplicates score zero") {
  Fixture f;
  const std::vector<std::filesystem::path> paths = {f.write("g1/a.png", png("same")), f.write("g2/b.png", png("same")),
                                                    f.write("g1/c.png", png("other")), f.write("g3/d.png", png("x"))};
  ingest_images(paths, ImageKind::kRaw, [](const auto& p) { return default_group_key(p); }, f.embedder, *f.store);
  const auto a = f.store->find_image_by_path(paths[0].string())->image_id;
  const auto b = f.store->find_image_by_path(paths[1].string())->image_id;

  ImageSearchOptions o;
  o.k = 1;
  const auto hits = f.search.by_id(a, o);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].record.image_id == b);
  CHECK(hits[0].hit.score == 0.0);
  CHECK(hits[0].record.path == paths[1].string());

  o.k = 10;
  for (const auto& h : f.search.by_id(a, o)) CHECK(h.record.image_id != a);
  CHECK(f.search.by_id(a, o).size() == 3);

  const auto same_group = f.search.by_id(a, o, true);
  CHECK(same_group.size() == 2);
  for (const auto& h : same_group) CHECK(h.record.group_key != std::optional<std::string>("g1"));

  o.exclude_group = "g2";
  for (const auto& h : f.search.by_id(a, o)) CHECK(h.record.group_key != std::optional<std::string>("g2"));

  try {
    f.search.by_id(987654, o);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
}

TEST_CASE("search by a new image embeds it first") {
  Fixture f;
  const auto p = f.write("g/a.png", png("needle"));
  const std::vector<std::filesystem::path> paths = {p, f.write("g/b.png", png("hay"))};
  ingest_images(paths, ImageKind::kRaw, {}, f.embedder, *f.store);
  ImageSearchOptions o;
  o.k = 2;
  const auto hits = f.search.by_image({"query.png", png("needle")}, f.embedder, o);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].record.path == p.string());
  CHECK(hits[0].hit.score == 0.0);
  CHECK_THROWS(f.search.by_image({"q.txt", "text"}, f.embedder, o, RetryPolicy::immediate(1)));
  ImageSearch empty(*f.store, f.matrices, "no-such-model");
  CHECK(empty.by_vector(EmbeddingVector{std::vector<float>(16, 1.0f), "no-such-model"}, o).empty());
}

TEST_CASE("1000 x 512 random vectors match the naive oracle under every measure") {
  auto store = open_sqlite_store(":memory:");
  MatrixCache matrices(*store);
  Rng rng(12);
  std::vector<std::vector<float>> rows;
  std::vector<std::int64_t> ids;
  for (int i = 0; i < 1000; ++i) {
    auto v = testing::random_vector(rng, 512);
    ImageRecord r;
    r.path = "img" + std::to_string(i) + ".png";
    r.group_key = "g" + std::to_string(i % 10);
    ids.push_back(store->upsert_image(r, {v, "clip"}));
    rows.push_back(std::move(v));
  }
  ImageSearch search(*store, matrices, "clip");
  const auto q = testing::random_vector(rng, 512);
  for (const auto measure : {SimilarityMeasure::kCosine, SimilarityMeasure::kEuclidean, SimilarityMeasure::kDot}) {
    ImageSearchOptions o;
    o.measure = measure;
    o.k = 25;
    const auto hits = search.by_vector({q, "clip"}, o);
    const auto expected = oracle::naive_rank(q, rows, ids, as_oracle(measure), 25);
    REQUIRE(hits.size() == 25);
    for (std::size_t i = 0; i < 25; ++i) {
      CHECK(hits[i].hit.row_id == expected[i].first);
      CHECK(hits[i].hit.score == expected[i].second);
      CHECK(hits[i].record.image_id == expected[i].first);
    }
    o.exclude_group = "g3";
    for (const auto& h : search.by_vector({q, "clip"}, o)) CHECK(h.record.group_key != std::optional<std::string>("g3"));
  }
}
