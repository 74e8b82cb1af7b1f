#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace scichat {

// Dense row-major view of stored vectors; row i belongs to row_ids[i].
struct EmbeddingMatrix {
  std::vector<std::int64_t> row_ids;
  std::size_t dim = 0;
  std::vector<float> data;
  std::string model_id;

  std::size_t rows() const { return row_ids.size(); }
  bool empty() const { return row_ids.empty(); }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data).subspan(i * dim, dim);
  }

  bool operator==(const EmbeddingMatrix&) const = default;
};

// `<stem>.ids` next to `<stem>.vecs`.
std::filesystem::path ids_sidecar_path(const std::filesystem::path& vecs_path);

// Filesystem-safe stem for a model id ("text-embedding-ada-002", "ViT-B/32" -> "ViT-B_32").
std::string model_file_stem(const std::string& model_id);

// Writes the .vecs cache and the newline-delimited .ids sidecar. Returns bytes written.
std::size_t save_matrix(const EmbeddingMatrix& matrix, const std::filesystem::path& vecs_path);

// Throws Error(kIntegrity) when the sidecar row count disagrees with the cache.
EmbeddingMatrix load_matrix(const std::filesystem::path& vecs_path);

}  // namespace scichat
