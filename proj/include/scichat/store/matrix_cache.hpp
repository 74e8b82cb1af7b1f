#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "scichat/corpus/document.hpp"
#include "scichat/store/document_store.hpp"

namespace scichat {

// Publishes immutable matrices; a store write makes the next get() rebuild.
class MatrixCache {
 public:
  explicit MatrixCache(DocumentStore& store) : store_(store) {}

  std::shared_ptr<const EmbeddingMatrix> chunks(ChunkKind kind, const std::string& model_id);
  std::shared_ptr<const EmbeddingMatrix> images(const std::string& model_id);

 private:
  struct Entry {
    std::uint64_t generation = 0;
    std::shared_ptr<const EmbeddingMatrix> matrix;
  };

  template <typename Build>
  std::shared_ptr<const EmbeddingMatrix> lookup(const std::string& key, Build&& build);

  DocumentStore& store_;
  std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

}  // namespace scichat
