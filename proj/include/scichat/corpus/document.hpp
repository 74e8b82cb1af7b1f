#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace scichat {

struct Author {
  std::string forename;
  std::string surname;

  bool operator==(const Author&) const = default;
};

struct DocumentRecord {
  std::string doc_id;
  std::string title;
  std::vector<Author> authors;
  std::string display_name;
  std::string abstract_text;
  // Main text only: no header, abstract, figures, tables or bibliography.
  std::string body_text;
  std::size_t word_count = 0;
  std::string source_path;

  bool operator==(const DocumentRecord&) const = default;
};

struct FigureRecord {
  std::string doc_id;
  std::string figure_label;
  std::string caption;
  std::string image_ref;

  bool operator==(const FigureRecord&) const = default;
};

enum class ChunkKind { kRaw, kSummary };

std::string_view to_string(ChunkKind kind);
ChunkKind parse_chunk_kind(std::string_view text);

using ChunkId = std::int64_t;

struct TextChunk {
  ChunkId chunk_id = 0;
  std::string doc_id;
  std::size_t ordinal = 0;
  // Offsets in Unicode scalar values into the source text.
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string raw_text;
  std::string augmented_text;
  ChunkKind kind = ChunkKind::kRaw;

  bool operator==(const TextChunk&) const = default;
};

// Stable id derived from (doc_id, kind, ordinal). Fits in 53 bits so it survives JSON numbers.
ChunkId make_chunk_id(std::string_view doc_id, ChunkKind kind, std::size_t ordinal);

}  // namespace scichat
