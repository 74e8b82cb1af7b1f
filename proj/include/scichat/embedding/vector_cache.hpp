#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "scichat/embedding/vector.hpp"

namespace scichat {

// .vecs layout, all integers little-endian:
//   magic[8] "SCIVECS\0" | version u32 | dim u32 | count u64 |
//   model_id_len u32 | model_id bytes | count * dim float32, row-major
inline constexpr std::array<char, 8> kVectorCacheMagic = {'S', 'C', 'I', 'V', 'E', 'C', 'S', '\0'};
inline constexpr std::uint32_t kVectorCacheVersion = 1;
inline constexpr std::string_view kVectorCacheExtension = ".vecs";

struct VectorCacheHeader {
  std::uint32_t version = kVectorCacheVersion;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  std::string model_id;

  std::size_t encoded_size() const { return 8 + 4 + 4 + 8 + 4 + model_id.size(); }
  std::uint64_t payload_size() const { return count * dim * sizeof(float); }
};

struct VectorBlock {
  VectorCacheHeader header;
  std::vector<float> data;  // count * dim, row-major
};

// Writes atomically (temp file + rename). Returns the total file size in bytes.
// Throws Error(kDimensionMismatch) when rows disagree on dim or model_id.
std::size_t write_vector_cache(const std::filesystem::path& path,
                               std::span<const EmbeddingVector> vectors);

std::size_t write_vector_block(const std::filesystem::path& path, const std::string& model_id,
                               std::size_t dim, std::span<const float> data);

// Throws Error(kFormat) on bad magic/version and Error(kLength) when the file
// size disagrees with the header. Never returns a partial result.
VectorBlock read_vector_block(const std::filesystem::path& path);

std::vector<EmbeddingVector> read_vector_cache(const std::filesystem::path& path);

}  // namespace scichat
