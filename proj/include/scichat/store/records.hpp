#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "scichat/corpus/document.hpp"

namespace scichat {

using ImageId = std::int64_t;

enum class ImageKind { kFigure, kRaw };

std::string_view to_string(ImageKind kind);
ImageKind parse_image_kind(std::string_view text);

struct ImageRecord {
  ImageId image_id = 0;
  ImageKind kind = ImageKind::kRaw;
  std::optional<std::string> doc_id;        // figures only
  std::optional<std::string> figure_label;  // figures only
  std::optional<std::string> group_key;     // e.g. experiment id for raw images
  std::optional<std::string> caption;
  std::string path;

  bool operator==(const ImageRecord&) const = default;
};

enum class JudgeKind { kLlm, kOracle };

std::string_view to_string(JudgeKind judge);
JudgeKind parse_judge_kind(std::string_view text);

struct ComparisonRecord {
  std::string doc_a;
  std::string doc_b;
  std::string winner;
  JudgeKind judge = JudgeKind::kOracle;

  const std::string& loser() const { return winner == doc_a ? doc_b : doc_a; }
  bool operator==(const ComparisonRecord&) const = default;
};

// One LLM summary of a raw chunk, with provenance.
struct SummaryRecord {
  ChunkId source_chunk_id = 0;
  std::string model_id;
  std::string created_at;
  std::string text;

  bool operator==(const SummaryRecord&) const = default;
};

struct ClassificationRecord {
  std::string doc_id;
  std::string model_id;
  std::optional<std::string> predicted;  // nullopt = abstention / unparseable
  std::string reply;
};

// A chunk together with the metadata of its source document.
struct StoredChunk {
  TextChunk chunk;
  std::string title;
  std::string display_name;
};

}  // namespace scichat
