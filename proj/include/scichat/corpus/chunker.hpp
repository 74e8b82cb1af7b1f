#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "scichat/corpus/document.hpp"

namespace scichat {

struct ChunkingParams {
  std::size_t chunk_size = 1400;
  std::size_t overlap = 280;

  // Throws Error(kInvalidArgument) unless 0 <= overlap < chunk_size.
  void validate() const;
  std::size_t stride() const { return chunk_size - overlap; }
};

struct ChunkSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const ChunkSpan&) const = default;
};

// 0 for empty text, 1 when length <= chunk_size, else ceil((length - size) / stride) + 1.
std::size_t expected_chunk_count(std::size_t length, const ChunkingParams& params);

// Chunk i covers [i * stride, min(i * stride + chunk_size, length)).
std::vector<ChunkSpan> chunk_spans(std::size_t length, const ChunkingParams& params);

// Splits text into windows measured in Unicode scalar values. The result has no
// document identity: doc_id is empty and augmented_text equals raw_text.
std::vector<TextChunk> chunk_text(std::string_view text, const ChunkingParams& params);

// Chunks `text` for one document and prepends display_name to every chunk.
std::vector<TextChunk> chunk_document(std::string_view doc_id, std::string_view display_name,
                                      std::string_view text, const ChunkingParams& params,
                                      ChunkKind kind = ChunkKind::kRaw);

inline std::vector<TextChunk> chunk_document(const DocumentRecord& doc,
                                             const ChunkingParams& params) {
  return chunk_document(doc.doc_id, doc.display_name, doc.body_text, params, ChunkKind::kRaw);
}

}  // namespace scichat
