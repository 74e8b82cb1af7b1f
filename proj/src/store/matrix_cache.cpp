#include "scichat/store/matrix_cache.hpp"

namespace scichat {

template <typename Build>
std::shared_ptr<const EmbeddingMatrix> MatrixCache::lookup(const std::string& key, Build&& build) {
  const auto generation = store_.generation();
  {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it != entries_.end() && it->second.generation == generation) return it->second.matrix;
  }
  auto matrix = std::make_shared<const EmbeddingMatrix>(build());
  std::lock_guard lock(mutex_);
  entries_[key] = {generation, matrix};
  return matrix;
}

std::shared_ptr<const EmbeddingMatrix> MatrixCache::chunks(ChunkKind kind,
                                                           const std::string& model_id) {
  return lookup(std::string(to_string(kind)) + "\x1f" + model_id,
                [&] { return store_.embedding_matrix(kind, model_id); });
}

std::shared_ptr<const EmbeddingMatrix> MatrixCache::images(const std::string& model_id) {
  return lookup("image\x1f" + model_id, [&] { return store_.image_matrix(model_id); });
}

}  // namespace scichat
