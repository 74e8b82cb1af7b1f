#include "scichat/corpus/document.hpp"

#include <string>

#include "scichat/common/error.hpp"
#include "scichat/common/hash.hpp"

namespace scichat {

std::string_view to_string(ChunkKind kind) {
  return kind == ChunkKind::kRaw ? "raw" : "summary";
}

ChunkKind parse_chunk_kind(std::string_view text) {
  if (text == "raw") return ChunkKind::kRaw;
  if (text == "summary") return ChunkKind::kSummary;
  throw Error(ErrorCode::kInvalidArgument, "unknown chunk kind: " + std::string(text));
}

ChunkId make_chunk_id(std::string_view doc_id, ChunkKind kind, std::size_t ordinal) {
  std::uint64_t h = fnv1a64(doc_id);
  h = fnv1a64(to_string(kind), h ^ 0x1F);
  h = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(ordinal)));
  constexpr std::uint64_t kMask = (std::uint64_t{1} << 53) - 1;
  // Zero is reserved so that a default-constructed chunk never aliases a real one.
  const std::uint64_t id = h & kMask;
  return static_cast<ChunkId>(id == 0 ? 1 : id);
}

}  // namespace scichat
