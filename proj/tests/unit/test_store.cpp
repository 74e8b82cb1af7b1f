#include <doctest.h>

#include <algorithm>
#include <thread>

#include "helpers.hpp"
#include "scichat/corpus/chunker.hpp"
#include "scichat/embedding/text_embedder.hpp"
#include "scichat/store/document_store.hpp"
#include "scichat/store/matrix_cache.hpp"

using namespace scichat;

namespace {

DocumentRecord make_doc(const std::string& id, std::size_t length) {
  DocumentRecord d;
  d.doc_id = id;
  d.title = "Title of " + id;
  d.authors = {{"Ana", "Lu"}, {"B", "Ocko"}};
  d.display_name = "Lu, Ocko, et al. \"Title of " + id + "\"";
  d.body_text = std::string(length, 'w');
  d.word_count = 1;
  d.source_path = id + ".xml";
  return d;
}

struct Prepared {
  DocumentRecord doc;
  std::vector<TextChunk> chunks;
  std::vector<EmbeddingVector> vectors;
};

Prepared prepare(const std::string& id, std::size_t length, std::size_t dim = 8, const std::string& model = "m") {
  Prepared p{make_doc(id, length), {}, {}};
  p.chunks = chunk_document(p.doc, ChunkingParams{});
  for (const auto& c : p.chunks) {
    auto v = mock_embed(c.augmented_text + id, dim);
    v.model_id = model;
    p.vectors.push_back(v);
  }
  return p;
}

UpsertCounts put(DocumentStore& store, const Prepared& p, std::span<const FigureRecord> figures = {}) {
  return store.upsert_document(p.doc, p.chunks, p.vectors, figures);
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

TEST_CASE("upsert stores the document and reports counts") {
  auto store = open_sqlite_store(":memory:");
  const auto p = prepare("d1", 3000);
  const std::vector<FigureRecord> figs = {{"d1", "Figure 1", "cap", "f.png"}};
  const auto counts = put(*store, p, figs);
  CHECK(counts == UpsertCounts{3, 3, 1});
  CHECK(store->document_count() == 1);
  CHECK(store->get_document("d1") == p.doc);
  CHECK_FALSE(store->get_document("zz").has_value());
  CHECK(store->document_chunks("d1", ChunkKind::kRaw) == p.chunks);
  CHECK(store->figures("d1") == figs);
  CHECK(store->chunk_count(ChunkKind::kRaw) == 3);
  CHECK(store->chunk_count(ChunkKind::kSummary) == 0);
  CHECK(store->model_dim("m") == std::optional<std::size_t>(8));
  CHECK_FALSE(store->model_dim("other").has_value());
}

TEST_CASE("upsert is idempotent and replaces older versions") {
  auto store = open_sqlite_store(":memory:");
  const auto p = prepare("d1", 3000);
  put(*store, p);
  const auto matrix = store->embedding_matrix(ChunkKind::kRaw, "m");
  const auto generation = store->generation();
  put(*store, p);
  CHECK(store->generation() > generation);
  CHECK(store->chunk_count(ChunkKind::kRaw) == 3);
  CHECK(store->embedding_matrix(ChunkKind::kRaw, "m") == matrix);

  const auto shorter = prepare("d1", 1000);
  put(*store, shorter);
  CHECK(store->chunk_count(ChunkKind::kRaw) == 1);
  CHECK(store->embedding_matrix(ChunkKind::kRaw, "m").rows() == 1);
}

TEST_CASE("a dim clash is rejected and the previous version survives") {
  auto store = open_sqlite_store(":memory:");
  const auto p = prepare("d1", 3000);
  put(*store, p);
  const auto generation = store->generation();
  const auto clash = prepare("d1", 1000, 16);
  CHECK(code_of([&] { put(*store, clash); }) == ErrorCode::kSchema);
  CHECK(store->generation() == generation);
  CHECK(store->document_chunks("d1", ChunkKind::kRaw) == p.chunks);
  // Same dim under a second model is fine.
  const auto other = prepare("d2", 1000, 16, "m16");
  CHECK_NOTHROW(put(*store, other));
  // Misaligned vectors.
  auto bad = prepare("d3", 3000);
  bad.vectors.pop_back();
  CHECK(code_of([&] { put(*store, bad); }) == ErrorCode::kInvalidArgument);
  CHECK_FALSE(store->get_document("d3").has_value());
}

TEST_CASE("embedding matrix rows are ordered by chunk id") {
  auto store = open_sqlite_store(":memory:");
  std::vector<std::pair<ChunkId, std::vector<float>>> expected;
  for (const auto& id : {"c", "a", "b", "e", "d"}) {
    const auto p = prepare(id, 5000);
    put(*store, p);
    for (std::size_t i = 0; i < p.chunks.size(); ++i) expected.emplace_back(p.chunks[i].chunk_id, p.vectors[i].values);
  }
  std::sort(expected.begin(), expected.end());
  const auto m = store->embedding_matrix(ChunkKind::kRaw, "m");
  REQUIRE(m.rows() == expected.size());
  CHECK(m.dim == 8);
  CHECK(m.model_id == "m");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    CHECK(m.row_ids[i] == expected[i].first);
    CHECK(std::equal(m.row(i).begin(), m.row(i).end(), expected[i].second.begin()));
  }
  CHECK(store->embedding_matrix(ChunkKind::kSummary, "m").empty());
  CHECK(store->embedding_matrix(ChunkKind::kRaw, "nope").empty());
}

TEST_CASE("fetch_chunks preserves order, duplicates and fails on unknown ids") {
  auto store = open_sqlite_store(":memory:");
  const auto p = prepare("d1", 3000);
  put(*store, p);
  CHECK(store->fetch_chunks({}).empty());
  const std::vector<ChunkId> ids = {p.chunks[2].chunk_id, p.chunks[0].chunk_id, p.chunks[2].chunk_id};
  const auto got = store->fetch_chunks(ids);
  REQUIRE(got.size() == 3);
  CHECK(got[0].chunk == p.chunks[2]);
  CHECK(got[1].chunk == p.chunks[0]);
  CHECK(got[2].chunk == p.chunks[2]);
  CHECK(got[0].title == "Title of d1");
  CHECK(got[0].display_name == p.doc.display_name);
  const std::vector<ChunkId> unknown = {p.chunks[0].chunk_id, 424242};
  try {
    store->fetch_chunks(unknown);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
    CHECK(std::string(e.what()).find("424242") != std::string::npos);
  }
}

TEST_CASE("summary chunks are replaced independently of raw chunks") {
  auto store = open_sqlite_store(":memory:");
  const auto p = prepare("d1", 3000);
  put(*store, p);
  auto summary = chunk_document("d1", p.doc.display_name, "short summary", ChunkingParams{}, ChunkKind::kSummary);
  const std::vector<EmbeddingVector> sv = {{mock_embed("s", 8).values, "m"}};
  const std::vector<SummaryRecord> records = {{p.chunks[0].chunk_id, "stub", "2024-01-01T00:00:00Z", "short"}};
  CHECK(store->replace_summary_chunks("d1", summary, sv, records).chunks == 1);
  CHECK(store->chunk_count(ChunkKind::kSummary) == 1);
  CHECK(store->summaries("d1") == records);
  CHECK(store->embedding_matrix(ChunkKind::kSummary, "m").rows() == 1);
  // Again with nothing: summaries go, raw chunks stay.
  store->replace_summary_chunks("d1", {}, {}, {});
  CHECK(store->chunk_count(ChunkKind::kSummary) == 0);
  CHECK(store->summaries("d1").empty());
  CHECK(store->chunk_count(ChunkKind::kRaw) == 3);
  CHECK(code_of([&] { store->replace_summary_chunks("zz", {}, {}, {}); }) == ErrorCode::kNotFound);
  CHECK(code_of([&] { store->replace_summary_chunks("d1", p.chunks, {}, {}); }) == ErrorCode::kInvalidArgument);
  // Re-upserting the document drops its summaries too.
  store->replace_summary_chunks("d1", summary, sv, records);
  put(*store, p);
  CHECK(store->chunk_count(ChunkKind::kSummary) == 0);
}

TEST_CASE("embeddings under a second model coexist") {
  auto store = open_sqlite_store(":memory:");
  const auto p = prepare("d1", 3000);
  put(*store, p);
  std::vector<ChunkId> ids;
  std::vector<EmbeddingVector> vs;
  for (const auto& c : p.chunks) {
    ids.push_back(c.chunk_id);
    vs.push_back(mock_embed(c.raw_text, 4));
  }
  CHECK(store->put_chunk_embeddings(ids, vs) == 3);
  CHECK(store->embedding_matrix(ChunkKind::kRaw, "mock-4").dim == 4);
  CHECK(store->embedding_matrix(ChunkKind::kRaw, "m").dim == 8);
}

TEST_CASE("images upsert by path and expose a matrix") {
  auto store = open_sqlite_store(":memory:");
  ImageRecord a{0, ImageKind::kRaw, std::nullopt, std::nullopt, "exp1", std::nullopt, "a.png"};
  ImageRecord b{0, ImageKind::kFigure, "d1", "Figure 1", std::nullopt, "cap", "b.png"};
  const auto ia = store->upsert_image(a, {{1, 0, 0}, "clip"});
  const auto ib = store->upsert_image(b, {{0, 1, 0}, "clip"});
  CHECK(ia != ib);
  CHECK(store->upsert_image(a, {{0, 0, 1}, "clip"}) == ia);
  CHECK(store->image_count() == 2);
  a.image_id = ia;
  CHECK(store->get_image(ia) == a);
  CHECK(store->find_image_by_path("b.png")->image_id == ib);
  CHECK_FALSE(store->find_image_by_path("c.png").has_value());
  CHECK_FALSE(store->get_image(999).has_value());
  CHECK(store->image_vector(ia, "clip")->values == std::vector<float>{0, 0, 1});
  const auto m = store->image_matrix("clip");
  CHECK(m.rows() == 2);
  CHECK(std::is_sorted(m.row_ids.begin(), m.row_ids.end()));
  const std::vector<ImageId> ids = {ib, ia};
  const auto recs = store->images(ids);
  CHECK(recs[0].path == "b.png");
  CHECK(recs[1].path == "a.png");
  const std::vector<ImageId> bad = {12345};
  CHECK(code_of([&] { store->images(bad); }) == ErrorCode::kNotFound);
}

TEST_CASE("comparisons and classifications persist") {
  auto store = open_sqlite_store(":memory:");
  const std::vector<ComparisonRecord> c = {{"a", "b", "a", JudgeKind::kLlm}, {"b", "c", "c", JudgeKind::kOracle}};
  store->add_comparisons(c);
  CHECK(store->comparisons() == c);
  CHECK(c[1].loser() == "b");
  const std::vector<ClassificationRecord> k = {{"a", "gpt", "SAXS", "SAXS"}, {"b", "gpt", std::nullopt, "??"}};
  store->put_classifications(k);
  const auto back = store->classifications("gpt");
  REQUIRE(back.size() == 2);
  CHECK(back[0].predicted == std::optional<std::string>("SAXS"));
  CHECK_FALSE(back[1].predicted.has_value());
  CHECK(store->classifications("other").empty());
}

TEST_CASE("a file-backed store survives reopening") {
  testing::TempDir dir;
  const auto path = (dir / "s.db").string();
  const auto p = prepare("d1", 3000);
  {
    auto store = open_sqlite_store(path);
    put(*store, p);
  }
  auto again = open_sqlite_store(path);
  CHECK(again->document_chunks("d1", ChunkKind::kRaw) == p.chunks);
  CHECK(again->embedding_matrix(ChunkKind::kRaw, "m").rows() == 3);
}

TEST_CASE("concurrent writers and readers do not corrupt the store") {
  auto store = open_sqlite_store(":memory:");
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 5; ++i) {
        put(*store, prepare("t" + std::to_string(t) + "-" + std::to_string(i), 2000));
        store->embedding_matrix(ChunkKind::kRaw, "m");
      }
    });
  }
  threads.clear();
  CHECK(store->document_count() == 20);
  CHECK(store->embedding_matrix(ChunkKind::kRaw, "m").rows() == 40);
}

TEST_CASE("matrix save and load with an ids sidecar") {
  testing::TempDir dir;
  EmbeddingMatrix m{{5, 9, -3}, 2, {1, 2, 3, 4, 5, 6}, "ViT-B/32"};
  CHECK(model_file_stem("ViT-B/32") == "ViT-B_32");
  CHECK(model_file_stem("text-embedding-ada-002") == "text-embedding-ada-002");
  const auto path = dir / "x.vecs";
  CHECK(ids_sidecar_path(path) == dir / "x.ids");
  save_matrix(m, path);
  CHECK(load_matrix(path) == m);
  testing::spit(dir / "x.ids", "5\n9\n");
  CHECK(code_of([&] { load_matrix(path); }) == ErrorCode::kIntegrity);
}

TEST_CASE("matrix cache republishes after writes") {
  auto store = open_sqlite_store(":memory:");
  MatrixCache cache(*store);
  CHECK(cache.chunks(ChunkKind::kRaw, "m")->empty());
  put(*store, prepare("d1", 3000));
  const auto first = cache.chunks(ChunkKind::kRaw, "m");
  CHECK(first->rows() == 3);
  CHECK(cache.chunks(ChunkKind::kRaw, "m") == first);
  put(*store, prepare("d2", 1000));
  const auto second = cache.chunks(ChunkKind::kRaw, "m");
  CHECK(second->rows() == 4);
  CHECK(first->rows() == 3);
  store->upsert_image({0, ImageKind::kRaw, {}, {}, {}, {}, "a.png"}, {{1, 2}, "clip"});
  CHECK(cache.images("clip")->rows() == 1);
}
