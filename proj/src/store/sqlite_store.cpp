#include <sqlite3.h>

#include <atomic>
#include <bit>
#include <cstring>
#include <mutex>

#include <nlohmann/json.hpp>

#include "scichat/common/error.hpp"
#include "scichat/migrations.hpp"
#include "scichat/store/document_store.hpp"

namespace scichat {
namespace {

class Statement {
 public:
  Statement(sqlite3* db, std::string_view sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) !=
        SQLITE_OK) {
      throw Error(ErrorCode::kIo, std::string("SQL prepare failed: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int index, std::string_view text) {
    check(sqlite3_bind_text(stmt_, index, text.data(), static_cast<int>(text.size()),
                            SQLITE_TRANSIENT));
    return *this;
  }
  Statement& bind(int index, std::int64_t value) {
    check(sqlite3_bind_int64(stmt_, index, value));
    return *this;
  }
  Statement& bind_optional(int index, const std::optional<std::string>& text) {
    if (text) return bind(index, std::string_view(*text));
    check(sqlite3_bind_null(stmt_, index));
    return *this;
  }
  Statement& bind_blob(int index, std::string_view bytes) {
    check(sqlite3_bind_blob(stmt_, index, bytes.data(), static_cast<int>(bytes.size()),
                            SQLITE_TRANSIENT));
    return *this;
  }

  // True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    const int extended = sqlite3_extended_errcode(db_);
    const std::string message = sqlite3_errmsg(db_);
    if ((extended & 0xFF) == SQLITE_CONSTRAINT) throw Error(ErrorCode::kSchema, message);
    throw Error(ErrorCode::kIo, "SQL step failed: " + message);
  }

  void run() {
    while (step()) {
    }
    reset();
  }

  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::string text(int col) const {
    const auto* data = sqlite3_column_text(stmt_, col);
    return data == nullptr ? std::string()
                           : std::string(reinterpret_cast<const char*>(data),
                                         static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)));
  }
  std::optional<std::string> optional_text(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return text(col);
  }
  std::string_view blob(int col) const {
    const auto* data = static_cast<const char*>(sqlite3_column_blob(stmt_, col));
    return {data, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))};
  }

 private:
  void check(int rc) const {
    if (rc != SQLITE_OK) throw Error(ErrorCode::kIo, std::string("SQL bind failed: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

std::string encode_vector(const std::vector<float>& values) {
  std::string bytes(values.size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (std::size_t b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  return bytes;
}

void decode_vector(std::string_view bytes, float* out) {
  const std::size_t n = bytes.size() / sizeof(float);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[i * 4 + b])) << (8 * b);
    }
    out[i] = std::bit_cast<float>(bits);
  }
}

std::string authors_to_json(const std::vector<Author>& authors) {
  nlohmann::json array = nlohmann::json::array();
  for (const auto& a : authors) array.push_back({{"forename", a.forename}, {"surname", a.surname}});
  return array.dump();
}

std::vector<Author> authors_from_json(const std::string& text) {
  std::vector<Author> authors;
  for (const auto& item : nlohmann::json::parse(text)) {
    authors.push_back({item.value("forename", ""), item.value("surname", "")});
  }
  return authors;
}

class SqliteStore : public DocumentStore {
 public:
  explicit SqliteStore(const std::string& path) {
    const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
    if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
      const std::string message = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      throw Error(ErrorCode::kIo, "cannot open store " + path + ": " + message);
    }
    sqlite3_busy_timeout(db_, 5000);
    exec("PRAGMA foreign_keys = ON");
    if (path != ":memory:") exec("PRAGMA journal_mode = WAL");
    migrate();
  }

  ~SqliteStore() override { sqlite3_close(db_); }

  UpsertCounts upsert_document(const DocumentRecord& doc, std::span<const TextChunk> chunks,
                               std::span<const EmbeddingVector> vectors,
                               std::span<const FigureRecord> figures) override {
    check_aligned(chunks, vectors);
    std::lock_guard lock(mutex_);
    return transaction([&] {
      Statement(db_, "DELETE FROM documents WHERE doc_id = ?1").bind(1, doc.doc_id).run();
      Statement insert(db_,
                       "INSERT INTO documents (doc_id, title, authors_json, display_name, "
                       "abstract_text, body_text, word_count, source_path) "
                       "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)");
      insert.bind(1, doc.doc_id)
          .bind(2, doc.title)
          .bind(3, authors_to_json(doc.authors))
          .bind(4, doc.display_name)
          .bind(5, doc.abstract_text)
          .bind(6, doc.body_text)
          .bind(7, static_cast<std::int64_t>(doc.word_count))
          .bind(8, doc.source_path)
          .run();
      UpsertCounts counts = insert_chunks(doc.doc_id, chunks, vectors);
      Statement figure(db_,
                       "INSERT INTO figures (doc_id, figure_label, caption, image_ref) "
                       "VALUES (?1, ?2, ?3, ?4)");
      for (const auto& f : figures) {
        figure.bind(1, doc.doc_id).bind(2, f.figure_label).bind(3, f.caption).bind(4, f.image_ref);
        figure.run();
        ++counts.figures;
      }
      return counts;
    });
  }

  UpsertCounts replace_summary_chunks(const std::string& doc_id, std::span<const TextChunk> chunks,
                                      std::span<const EmbeddingVector> vectors,
                                      std::span<const SummaryRecord> summaries) override {
    check_aligned(chunks, vectors);
    for (const auto& chunk : chunks) {
      if (chunk.kind != ChunkKind::kSummary || chunk.doc_id != doc_id) {
        throw Error(ErrorCode::kInvalidArgument, "replace_summary_chunks expects summary chunks of " + doc_id);
      }
    }
    std::lock_guard lock(mutex_);
    return transaction([&] {
      require_document(doc_id);
      Statement(db_, "DELETE FROM chunks WHERE doc_id = ?1 AND kind = 'summary'").bind(1, doc_id).run();
      Statement(db_,
                "DELETE FROM chunk_summaries WHERE source_chunk_id IN "
                "(SELECT chunk_id FROM chunks WHERE doc_id = ?1)")
          .bind(1, doc_id)
          .run();
      auto counts = insert_chunks(doc_id, chunks, vectors);
      Statement insert(db_,
                       "INSERT INTO chunk_summaries (source_chunk_id, model_id, created_at, "
                       "summary_text) VALUES (?1, ?2, ?3, ?4)");
      for (const auto& s : summaries) {
        insert.bind(1, s.source_chunk_id).bind(2, s.model_id).bind(3, s.created_at).bind(4, s.text);
        insert.run();
      }
      return counts;
    });
  }

  std::size_t put_chunk_embeddings(std::span<const ChunkId> chunk_ids,
                                   std::span<const EmbeddingVector> vectors) override {
    if (chunk_ids.size() != vectors.size()) {
      throw Error(ErrorCode::kInvalidArgument, "chunk ids and vectors are not aligned");
    }
    std::lock_guard lock(mutex_);
    return transaction([&] {
      Statement insert(db_,
                       "INSERT OR REPLACE INTO chunk_embeddings (chunk_id, model_id, dim, vector) "
                       "VALUES (?1, ?2, ?3, ?4)");
      for (std::size_t i = 0; i < chunk_ids.size(); ++i) {
        register_model(vectors[i]);
        insert.bind(1, chunk_ids[i])
            .bind(2, vectors[i].model_id)
            .bind(3, static_cast<std::int64_t>(vectors[i].dim()))
            .bind_blob(4, encode_vector(vectors[i].values));
        insert.run();
      }
      return chunk_ids.size();
    });
  }

  std::optional<DocumentRecord> get_document(const std::string& doc_id) override {
    std::lock_guard lock(mutex_);
    Statement query(db_, std::string(kDocumentColumns) + " WHERE doc_id = ?1");
    query.bind(1, doc_id);
    if (!query.step()) return std::nullopt;
    return read_document(query);
  }

  std::vector<DocumentRecord> list_documents() override {
    std::lock_guard lock(mutex_);
    Statement query(db_, std::string(kDocumentColumns) + " ORDER BY doc_id");
    std::vector<DocumentRecord> docs;
    while (query.step()) docs.push_back(read_document(query));
    return docs;
  }

  std::size_t document_count() override {
    std::lock_guard lock(mutex_);
    Statement query(db_, "SELECT COUNT(*) FROM documents");
    query.step();
    return static_cast<std::size_t>(query.integer(0));
  }

  std::vector<FigureRecord> figures(const std::string& doc_id) override {
    std::lock_guard lock(mutex_);
    Statement query(db_,
                    "SELECT figure_label, caption, image_ref FROM figures WHERE doc_id = ?1 "
                    "ORDER BY rowid");
    query.bind(1, doc_id);
    std::vector<FigureRecord> out;
    while (query.step()) out.push_back({doc_id, query.text(0), query.text(1), query.text(2)});
    return out;
  }

  std::vector<TextChunk> document_chunks(const std::string& doc_id, ChunkKind kind) override {
    std::lock_guard lock(mutex_);
    Statement query(db_, std::string(kChunkColumns) +
                             " WHERE c.doc_id = ?1 AND c.kind = ?2 ORDER BY c.ordinal");
    query.bind(1, doc_id).bind(2, to_string(kind));
    std::vector<TextChunk> out;
    while (query.step()) out.push_back(read_chunk(query).chunk);
    return out;
  }

  std::size_t chunk_count(ChunkKind kind) override {
    std::lock_guard lock(mutex_);
    Statement query(db_, "SELECT COUNT(*) FROM chunks WHERE kind = ?1");
    query.bind(1, to_string(kind));
    query.step();
    return static_cast<std::size_t>(query.integer(0));
  }

  std::vector<SummaryRecord> summaries(const std::string& doc_id) override {
    std::lock_guard lock(mutex_);
    Statement query(db_,
                    "SELECT s.source_chunk_id, s.model_id, s.created_at, s.summary_text "
                    "FROM chunk_summaries s JOIN chunks c ON c.chunk_id = s.source_chunk_id "
                    "WHERE c.doc_id = ?1 ORDER BY c.ordinal");
    query.bind(1, doc_id);
    std::vector<SummaryRecord> out;
    while (query.step()) out.push_back({query.integer(0), query.text(1), query.text(2), query.text(3)});
    return out;
  }

  std::vector<StoredChunk> fetch_chunks(std::span<const ChunkId> chunk_ids) override {
    std::lock_guard lock(mutex_);
    Statement query(db_, std::string(kChunkColumns) + " WHERE c.chunk_id = ?1");
    std::vector<StoredChunk> out;
    out.reserve(chunk_ids.size());
    for (const auto id : chunk_ids) {
      query.bind(1, id);
      if (!query.step()) throw Error(ErrorCode::kNotFound, "unknown chunk id " + std::to_string(id));
      out.push_back(read_chunk(query));
      query.reset();
    }
    return out;
  }

  EmbeddingMatrix embedding_matrix(ChunkKind kind, const std::string& model_id) override {
    std::lock_guard lock(mutex_);
    Statement query(db_,
                    "SELECT e.chunk_id, e.dim, e.vector FROM chunk_embeddings e "
                    "JOIN chunks c ON c.chunk_id = e.chunk_id "
                    "WHERE c.kind = ?1 AND e.model_id = ?2 ORDER BY e.chunk_id");
    query.bind(1, to_string(kind)).bind(2, model_id);
    return read_matrix(query, model_id);
  }

  std::optional<std::size_t> model_dim(const std::string& model_id) override {
    std::lock_guard lock(mutex_);
    return registered_dim(model_id);
  }

  ImageId upsert_image(const ImageRecord& record, const EmbeddingVector& vector) override {
    if (record.kind == ImageKind::kFigure && !record.doc_id) {
      throw Error(ErrorCode::kInvalidArgument, "figure image " + record.path + " needs a doc_id");
    }
    std::lock_guard lock(mutex_);
    return transaction([&] {
      Statement upsert(db_,
                       "INSERT INTO images (kind, doc_id, figure_label, group_key, caption, path) "
                       "VALUES (?1, ?2, ?3, ?4, ?5, ?6) ON CONFLICT(path) DO UPDATE SET "
                       "kind = excluded.kind, doc_id = excluded.doc_id, "
                       "figure_label = excluded.figure_label, group_key = excluded.group_key, "
                       "caption = excluded.caption");
      upsert.bind(1, to_string(record.kind))
          .bind_optional(2, record.doc_id)
          .bind_optional(3, record.figure_label)
          .bind_optional(4, record.group_key)
          .bind_optional(5, record.caption)
          .bind(6, record.path)
          .run();
      Statement id_query(db_, "SELECT image_id FROM images WHERE path = ?1");
      id_query.bind(1, record.path);
      id_query.step();
      const ImageId id = id_query.integer(0);
      register_model(vector);
      Statement insert(db_,
                       "INSERT OR REPLACE INTO image_embeddings (image_id, model_id, dim, vector) "
                       "VALUES (?1, ?2, ?3, ?4)");
      insert.bind(1, id)
          .bind(2, vector.model_id)
          .bind(3, static_cast<std::int64_t>(vector.dim()))
          .bind_blob(4, encode_vector(vector.values))
          .run();
      return id;
    });
  }

  std::optional<ImageRecord> get_image(ImageId image_id) override {
    std::lock_guard lock(mutex_);
    Statement query(db_, std::string(kImageColumns) + " WHERE image_id = ?1");
    query.bind(1, image_id);
    if (!query.step()) return std::nullopt;
    return read_image(query);
  }

  std::optional<ImageRecord> find_image_by_path(const std::string& path) override {
    std::lock_guard lock(mutex_);
    Statement query(db_, std::string(kImageColumns) + " WHERE path = ?1");
    query.bind(1, path);
    if (!query.step()) return std::nullopt;
    return read_image(query);
  }

  std::vector<ImageRecord> images(std::span<const ImageId> image_ids) override {
    std::lock_guard lock(mutex_);
    Statement query(db_, std::string(kImageColumns) + " WHERE image_id = ?1");
    std::vector<ImageRecord> out;
    for (const auto id : image_ids) {
      query.bind(1, id);
      if (!query.step()) throw Error(ErrorCode::kNotFound, "unknown image id " + std::to_string(id));
      out.push_back(read_image(query));
      query.reset();
    }
    return out;
  }

  std::size_t image_count() override {
    std::lock_guard lock(mutex_);
    Statement query(db_, "SELECT COUNT(*) FROM images");
    query.step();
    return static_cast<std::size_t>(query.integer(0));
  }

  EmbeddingMatrix image_matrix(const std::string& model_id) override {
    std::lock_guard lock(mutex_);
    Statement query(db_,
                    "SELECT image_id, dim, vector FROM image_embeddings WHERE model_id = ?1 "
                    "ORDER BY image_id");
    query.bind(1, model_id);
    return read_matrix(query, model_id);
  }

  std::optional<EmbeddingVector> image_vector(ImageId image_id, const std::string& model_id) override {
    std::lock_guard lock(mutex_);
    Statement query(db_, "SELECT vector FROM image_embeddings WHERE image_id = ?1 AND model_id = ?2");
    query.bind(1, image_id).bind(2, model_id);
    if (!query.step()) return std::nullopt;
    const auto bytes = query.blob(0);
    EmbeddingVector v{std::vector<float>(bytes.size() / sizeof(float)), model_id};
    decode_vector(bytes, v.values.data());
    return v;
  }

  void add_comparisons(std::span<const ComparisonRecord> records) override {
    std::lock_guard lock(mutex_);
    transaction([&] {
      Statement insert(db_, "INSERT INTO comparisons (doc_a, doc_b, winner, judge) VALUES (?1, ?2, ?3, ?4)");
      for (const auto& r : records) {
        insert.bind(1, r.doc_a).bind(2, r.doc_b).bind(3, r.winner).bind(4, to_string(r.judge));
        insert.run();
      }
      return 0;
    });
  }

  std::vector<ComparisonRecord> comparisons() override {
    std::lock_guard lock(mutex_);
    Statement query(db_, "SELECT doc_a, doc_b, winner, judge FROM comparisons ORDER BY comparison_id");
    std::vector<ComparisonRecord> out;
    while (query.step()) {
      out.push_back({query.text(0), query.text(1), query.text(2), parse_judge_kind(query.text(3))});
    }
    return out;
  }

  void put_classifications(std::span<const ClassificationRecord> records) override {
    std::lock_guard lock(mutex_);
    transaction([&] {
      Statement insert(db_,
                       "INSERT OR REPLACE INTO classifications (doc_id, model_id, predicted, reply) "
                       "VALUES (?1, ?2, ?3, ?4)");
      for (const auto& r : records) {
        insert.bind(1, r.doc_id).bind(2, r.model_id).bind_optional(3, r.predicted).bind(4, r.reply);
        insert.run();
      }
      return 0;
    });
  }

  std::vector<ClassificationRecord> classifications(const std::string& model_id) override {
    std::lock_guard lock(mutex_);
    Statement query(db_,
                    "SELECT doc_id, model_id, predicted, reply FROM classifications "
                    "WHERE model_id = ?1 ORDER BY doc_id");
    query.bind(1, model_id);
    std::vector<ClassificationRecord> out;
    while (query.step()) {
      out.push_back({query.text(0), query.text(1), query.optional_text(2), query.text(3)});
    }
    return out;
  }

  std::uint64_t generation() const override { return generation_.load(); }

 private:
  static constexpr std::string_view kDocumentColumns =
      "SELECT doc_id, title, authors_json, display_name, abstract_text, body_text, word_count, "
      "source_path FROM documents";
  static constexpr std::string_view kChunkColumns =
      "SELECT c.chunk_id, c.doc_id, c.kind, c.ordinal, c.char_start, c.char_end, c.raw_text, "
      "c.augmented_text, d.title, d.display_name FROM chunks c JOIN documents d ON d.doc_id = c.doc_id";
  static constexpr std::string_view kImageColumns =
      "SELECT image_id, kind, doc_id, figure_label, group_key, caption, path FROM images";

  void exec(const std::string& sql) {
    char* message = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &message) != SQLITE_OK) {
      const std::string error = message ? message : "unknown error";
      sqlite3_free(message);
      throw Error(ErrorCode::kIo, "SQL failed: " + error);
    }
  }

  void migrate() {
    exec("CREATE TABLE IF NOT EXISTS schema_migrations (version INTEGER PRIMARY KEY)");
    for (const auto& migration : migrations::kAll) {
      Statement applied(db_, "SELECT 1 FROM schema_migrations WHERE version = ?1");
      applied.bind(1, static_cast<std::int64_t>(migration.version));
      if (applied.step()) continue;
      exec("BEGIN");
      try {
        exec(std::string(migration.sql));
        Statement(db_, "INSERT INTO schema_migrations (version) VALUES (?1)")
            .bind(1, static_cast<std::int64_t>(migration.version))
            .run();
        exec("COMMIT");
      } catch (...) {
        exec("ROLLBACK");
        throw;
      }
    }
  }

  template <typename Fn>
  auto transaction(Fn&& fn) -> decltype(fn()) {
    exec("BEGIN IMMEDIATE");
    try {
      auto result = fn();
      exec("COMMIT");
      ++generation_;
      return result;
    } catch (...) {
      sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
      throw;
    }
  }

  static void check_aligned(std::span<const TextChunk> chunks, std::span<const EmbeddingVector> vectors) {
    if (!vectors.empty() && vectors.size() != chunks.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::to_string(chunks.size()) + " chunks but " + std::to_string(vectors.size()) + " vectors");
    }
  }

  void require_document(const std::string& doc_id) {
    Statement query(db_, "SELECT 1 FROM documents WHERE doc_id = ?1");
    query.bind(1, doc_id);
    if (!query.step()) throw Error(ErrorCode::kNotFound, "unknown document " + doc_id);
  }

  std::optional<std::size_t> registered_dim(const std::string& model_id) {
    Statement query(db_, "SELECT dim FROM embedding_models WHERE model_id = ?1");
    query.bind(1, model_id);
    if (!query.step()) return std::nullopt;
    return static_cast<std::size_t>(query.integer(0));
  }

  void register_model(const EmbeddingVector& vector) {
    vector.validate();
    if (const auto dim = registered_dim(vector.model_id)) {
      if (*dim != vector.dim()) {
        throw Error(ErrorCode::kSchema, "model " + vector.model_id + " is registered with dim " +
                                            std::to_string(*dim) + ", got " + std::to_string(vector.dim()));
      }
      return;
    }
    Statement(db_, "INSERT INTO embedding_models (model_id, dim) VALUES (?1, ?2)")
        .bind(1, vector.model_id)
        .bind(2, static_cast<std::int64_t>(vector.dim()))
        .run();
  }

  UpsertCounts insert_chunks(const std::string& doc_id, std::span<const TextChunk> chunks,
                             std::span<const EmbeddingVector> vectors) {
    UpsertCounts counts;
    Statement insert(db_,
                     "INSERT INTO chunks (chunk_id, doc_id, kind, ordinal, char_start, char_end, "
                     "raw_text, augmented_text) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)");
    Statement embed(db_,
                    "INSERT INTO chunk_embeddings (chunk_id, model_id, dim, vector) "
                    "VALUES (?1, ?2, ?3, ?4)");
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto& c = chunks[i];
      if (c.doc_id != doc_id) {
        throw Error(ErrorCode::kInvalidArgument, "chunk " + std::to_string(c.chunk_id) + " belongs to " + c.doc_id);
      }
      insert.bind(1, c.chunk_id)
          .bind(2, doc_id)
          .bind(3, to_string(c.kind))
          .bind(4, static_cast<std::int64_t>(c.ordinal))
          .bind(5, static_cast<std::int64_t>(c.char_start))
          .bind(6, static_cast<std::int64_t>(c.char_end))
          .bind(7, c.raw_text)
          .bind(8, c.augmented_text);
      insert.run();
      ++counts.chunks;
      if (vectors.empty()) continue;
      register_model(vectors[i]);
      embed.bind(1, c.chunk_id)
          .bind(2, vectors[i].model_id)
          .bind(3, static_cast<std::int64_t>(vectors[i].dim()))
          .bind_blob(4, encode_vector(vectors[i].values));
      embed.run();
      ++counts.vectors;
    }
    return counts;
  }

  static DocumentRecord read_document(const Statement& q) {
    DocumentRecord doc;
    doc.doc_id = q.text(0);
    doc.title = q.text(1);
    doc.authors = authors_from_json(q.text(2));
    doc.display_name = q.text(3);
    doc.abstract_text = q.text(4);
    doc.body_text = q.text(5);
    doc.word_count = static_cast<std::size_t>(q.integer(6));
    doc.source_path = q.text(7);
    return doc;
  }

  static StoredChunk read_chunk(const Statement& q) {
    StoredChunk out;
    auto& c = out.chunk;
    c.chunk_id = q.integer(0);
    c.doc_id = q.text(1);
    c.kind = parse_chunk_kind(q.text(2));
    c.ordinal = static_cast<std::size_t>(q.integer(3));
    c.char_start = static_cast<std::size_t>(q.integer(4));
    c.char_end = static_cast<std::size_t>(q.integer(5));
    c.raw_text = q.text(6);
    c.augmented_text = q.text(7);
    out.title = q.text(8);
    out.display_name = q.text(9);
    return out;
  }

  static ImageRecord read_image(const Statement& q) {
    ImageRecord r;
    r.image_id = q.integer(0);
    r.kind = parse_image_kind(q.text(1));
    r.doc_id = q.optional_text(2);
    r.figure_label = q.optional_text(3);
    r.group_key = q.optional_text(4);
    r.caption = q.optional_text(5);
    r.path = q.text(6);
    return r;
  }

  static EmbeddingMatrix read_matrix(Statement& query, const std::string& model_id) {
    EmbeddingMatrix matrix;
    matrix.model_id = model_id;
    while (query.step()) {
      const auto dim = static_cast<std::size_t>(query.integer(1));
      const auto bytes = query.blob(2);
      if (matrix.row_ids.empty()) {
        matrix.dim = dim;
      } else if (dim != matrix.dim) {
        throw Error(ErrorCode::kIntegrity, "mixed dimensions under model " + model_id);
      }
      if (bytes.size() != dim * sizeof(float)) {
        throw Error(ErrorCode::kIntegrity, "stored vector " + std::to_string(query.integer(0)) +
                                               " has the wrong byte length");
      }
      matrix.row_ids.push_back(query.integer(0));
      const auto offset = matrix.data.size();
      matrix.data.resize(offset + dim);
      decode_vector(bytes, matrix.data.data() + offset);
    }
    return matrix;
  }

  sqlite3* db_ = nullptr;
  std::recursive_mutex mutex_;
  std::atomic<std::uint64_t> generation_{0};
};

}  // namespace

std::unique_ptr<DocumentStore> open_sqlite_store(const std::string& path) {
  return std::make_unique<SqliteStore>(path);
}

}  // namespace scichat
