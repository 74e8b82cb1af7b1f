#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scichat/corpus/document.hpp"
#include "scichat/embedding/vector.hpp"
#include "scichat/store/matrix.hpp"
#include "scichat/store/records.hpp"

namespace scichat {

struct UpsertCounts {
  std::size_t chunks = 0;
  std::size_t vectors = 0;
  std::size_t figures = 0;

  bool operator==(const UpsertCounts&) const = default;
};

// Relational persistence for the corpus. Implementations are safe for
// concurrent use; writes are serialized.
class DocumentStore {
 public:
  virtual ~DocumentStore() = default;

  // Replaces every row of doc.doc_id atomically. `vectors` is empty or aligned
  // 1:1 with `chunks`. Throws Error(kSchema) if a vector's dim disagrees with the
  // dim already registered for its model_id; the previous version is kept.
  virtual UpsertCounts upsert_document(const DocumentRecord& doc,
                                       std::span<const TextChunk> chunks,
                                       std::span<const EmbeddingVector> vectors,
                                       std::span<const FigureRecord> figures = {}) = 0;

  // Replaces only the summary chunks (and their summaries) of one document.
  virtual UpsertCounts replace_summary_chunks(const std::string& doc_id,
                                              std::span<const TextChunk> chunks,
                                              std::span<const EmbeddingVector> vectors,
                                              std::span<const SummaryRecord> summaries) = 0;

  // Adds or replaces embeddings of existing chunks (e.g. under another model).
  virtual std::size_t put_chunk_embeddings(std::span<const ChunkId> chunk_ids,
                                           std::span<const EmbeddingVector> vectors) = 0;

  virtual std::optional<DocumentRecord> get_document(const std::string& doc_id) = 0;
  virtual std::vector<DocumentRecord> list_documents() = 0;
  virtual std::size_t document_count() = 0;
  virtual std::vector<FigureRecord> figures(const std::string& doc_id) = 0;

  // Chunks of one document in ordinal order.
  virtual std::vector<TextChunk> document_chunks(const std::string& doc_id, ChunkKind kind) = 0;
  virtual std::size_t chunk_count(ChunkKind kind) = 0;
  virtual std::vector<SummaryRecord> summaries(const std::string& doc_id) = 0;

  // Order-preserving; duplicates allowed. Throws Error(kNotFound) naming the first unknown id.
  virtual std::vector<StoredChunk> fetch_chunks(std::span<const ChunkId> chunk_ids) = 0;

  // Rows ordered by chunk_id ascending. Throws Error(kIntegrity) on mixed dims.
  virtual EmbeddingMatrix embedding_matrix(ChunkKind kind, const std::string& model_id) = 0;

  virtual std::optional<std::size_t> model_dim(const std::string& model_id) = 0;

  // Upserts by path; returns the (stable) image id.
  virtual ImageId upsert_image(const ImageRecord& record, const EmbeddingVector& vector) = 0;
  virtual std::optional<ImageRecord> get_image(ImageId image_id) = 0;
  virtual std::optional<ImageRecord> find_image_by_path(const std::string& path) = 0;
  virtual std::vector<ImageRecord> images(std::span<const ImageId> image_ids) = 0;
  virtual std::size_t image_count() = 0;
  virtual EmbeddingMatrix image_matrix(const std::string& model_id) = 0;
  virtual std::optional<EmbeddingVector> image_vector(ImageId image_id,
                                                      const std::string& model_id) = 0;

  virtual void add_comparisons(std::span<const ComparisonRecord> records) = 0;
  virtual std::vector<ComparisonRecord> comparisons() = 0;
  virtual void put_classifications(std::span<const ClassificationRecord> records) = 0;
  virtual std::vector<ClassificationRecord> classifications(const std::string& model_id) = 0;

  // Increments after every committed write; lets readers republish cached matrices.
  virtual std::uint64_t generation() const = 0;
};

// SQLite-backed store; ":memory:" gives a private in-memory database. Applies
// the bundled schema migrations on open.
std::unique_ptr<DocumentStore> open_sqlite_store(const std::string& path);

}  // namespace scichat
