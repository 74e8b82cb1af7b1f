#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scichat/embedding/image_embedder.hpp"
#include "scichat/kernels/measure.hpp"
#include "scichat/retrieval/retrieval.hpp"
#include "scichat/store/document_store.hpp"
#include "scichat/store/matrix_cache.hpp"

namespace scichat {

// One manifest row: path,kind,doc_id,figure_label,group_key,caption.
struct ManifestEntry {
  std::filesystem::path path;
  ImageKind kind = ImageKind::kRaw;
  std::optional<std::string> doc_id;
  std::optional<std::string> figure_label;
  std::optional<std::string> group_key;
  std::optional<std::string> caption;
};

// Relative paths resolve against the manifest's directory. Raw images without
// a group_key get default_group_key(path). Throws Error(kFormat) on a bad
// header or kind, and for figures without doc_id.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, std::span<const ManifestEntry> entries);

// Name of the image's parent directory.
std::string default_group_key(const std::filesystem::path& image_path);

struct ImageIngestCounts {
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::vector<std::pair<std::string, std::string>> errors;  // path, message
};

struct ImageIngestOptions {
  std::size_t workers = 4;
  RetryPolicy retry;
};

// Reads, embeds and stores each image. Unreadable or undecodable images are
// logged and counted as failures; the rest continue.
ImageIngestCounts ingest_images(std::span<const ManifestEntry> entries, ImageEmbedder& provider,
                                DocumentStore& store, const ImageIngestOptions& options = {});

using GroupKeyFn = std::function<std::optional<std::string>(const std::filesystem::path&)>;

ImageIngestCounts ingest_images(std::span<const std::filesystem::path> paths, ImageKind kind,
                                const GroupKeyFn& group_key, ImageEmbedder& provider, DocumentStore& store,
                                const ImageIngestOptions& options = {});

struct ImageHit {
  RetrievalHit hit;
  ImageRecord record;
};

struct ImageSearchOptions {
  SimilarityMeasure measure = SimilarityMeasure::kEuclidean;
  std::size_t k = 5;
  // Drops candidates whose group_key equals this one.
  std::optional<std::string> exclude_group;
};

class ImageSearch {
 public:
  ImageSearch(DocumentStore& store, MatrixCache& matrices, std::string model_id)
      : store_(store), matrices_(matrices), model_id_(std::move(model_id)) {}

  std::vector<ImageHit> by_vector(const EmbeddingVector& query, const ImageSearchOptions& options) const;

  // Queries with a stored image; that image is always excluded. With
  // exclude_same_group the stored image's group_key becomes the exclusion.
  // Throws Error(kNotFound) for unknown ids.
  std::vector<ImageHit> by_id(ImageId image_id, ImageSearchOptions options, bool exclude_same_group = false) const;

  std::vector<ImageHit> by_image(const ImageInput& image, ImageEmbedder& provider,
                                 const ImageSearchOptions& options, const RetryPolicy& retry = {}) const;

  const std::string& model_id() const { return model_id_; }

 private:
  std::vector<ImageHit> run(std::span<const float> query, const ImageSearchOptions& options,
                            std::optional<ImageId> self) const;

  DocumentStore& store_;
  MatrixCache& matrices_;
  std::string model_id_;
};

}  // namespace scichat
