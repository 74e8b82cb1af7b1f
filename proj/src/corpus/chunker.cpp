#include "scichat/corpus/chunker.hpp"

#include <string>

#include "scichat/common/error.hpp"
#include "scichat/common/utf8.hpp"
#include "scichat/corpus/display_name.hpp"

namespace scichat {

void ChunkingParams::validate() const {
  if (chunk_size < 1) throw Error(ErrorCode::kInvalidArgument, "chunk_size must be >= 1");
  if (overlap >= chunk_size) {
    throw Error(ErrorCode::kInvalidArgument,
                "overlap (" + std::to_string(overlap) + ") must be smaller than chunk_size (" +
                    std::to_string(chunk_size) + ")");
  }
}

std::size_t expected_chunk_count(std::size_t length, const ChunkingParams& params) {
  params.validate();
  if (length == 0) return 0;
  if (length <= params.chunk_size) return 1;
  const std::size_t stride = params.stride();
  return (length - params.chunk_size + stride - 1) / stride + 1;
}

std::vector<ChunkSpan> chunk_spans(std::size_t length, const ChunkingParams& params) {
  const std::size_t count = expected_chunk_count(length, params);
  std::vector<ChunkSpan> spans;
  spans.reserve(count);
  const std::size_t stride = params.stride();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * stride;
    spans.push_back({start, std::min(start + params.chunk_size, length)});
  }
  return spans;
}

std::vector<TextChunk> chunk_text(std::string_view text, const ChunkingParams& params) {
  const auto offsets = utf8::scalar_offsets(text);
  const std::size_t length = offsets.size() - 1;
  std::vector<TextChunk> chunks;
  std::size_t ordinal = 0;
  for (const auto& span : chunk_spans(length, params)) {
    TextChunk chunk;
    chunk.ordinal = ordinal++;
    chunk.char_start = span.start;
    chunk.char_end = span.end;
    chunk.raw_text = std::string(utf8::slice(text, offsets, span.start, span.end));
    chunk.augmented_text = chunk.raw_text;
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

std::vector<TextChunk> chunk_document(std::string_view doc_id, std::string_view display_name,
                                      std::string_view text, const ChunkingParams& params,
                                      ChunkKind kind) {
  auto chunks = chunk_text(text, params);
  for (auto& chunk : chunks) {
    chunk.doc_id = std::string(doc_id);
    chunk.kind = kind;
    chunk.chunk_id = make_chunk_id(doc_id, kind, chunk.ordinal);
    chunk.augmented_text = augment_chunk_text(display_name, chunk.raw_text);
  }
  return chunks;
}

}  // namespace scichat
