#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scichat/common/concurrency.hpp"
#include "scichat/common/http.hpp"
#include "scichat/common/retry.hpp"
#include "scichat/embedding/vector.hpp"

namespace scichat {

enum class ImageFormat { kUnknown, kPng, kJpeg, kGif, kBmp, kTiff, kWebp };

// Identifies the container from its signature bytes.
ImageFormat detect_image_format(std::string_view bytes);
std::string_view mime_type(ImageFormat format);

struct ImageInput {
  std::string name;  // file name, used to key precomputed vectors
  std::string bytes;
};

class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual std::string model_id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed(const ImageInput& image) = 0;
};

struct ImageEmbedResult {
  std::optional<EmbeddingVector> vector;
  std::string error;

  bool ok() const { return vector.has_value(); }
};

// Per-item results: an undecodable image or a failed request marks that item
// and the rest of the batch continues.
std::vector<ImageEmbedResult> embed_images(std::span<const ImageInput> images,
                                           ImageEmbedder& provider,
                                           const RetryPolicy& retry = RetryPolicy{});

// Deterministic stand-in for a CLIP-style model. Vectors are hash-seeded and
// deliberately not unit-norm.
class MockImageEmbedder : public ImageEmbedder {
 public:
  explicit MockImageEmbedder(std::size_t dim = 512) : dim_(dim) {}
  std::string model_id() const override;
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(const ImageInput& image) override;

 private:
  std::size_t dim_;
};

// POSTs raw image bytes and expects {"embedding": [...]} (or an OpenAI-style
// {"data": [{"embedding": [...]}]}).
class HttpImageEmbedder : public ImageEmbedder {
 public:
  struct Options {
    std::string url;
    std::string model = "ViT-B/32";
    std::size_t dim = 512;
    std::string api_key;
    std::ptrdiff_t max_concurrency = 4;
  };

  HttpImageEmbedder(Options options, std::shared_ptr<HttpTransport> transport);
  std::string model_id() const override { return options_.model; }
  std::size_t dim() const override { return options_.dim; }
  EmbeddingVector embed(const ImageInput& image) override;

 private:
  Options options_;
  std::shared_ptr<HttpTransport> transport_;
  ConcurrencyLimiter limiter_;
};

// Reads <dir>/<image file name>.f32: dim little-endian float32 values.
class PrecomputedImageEmbedder : public ImageEmbedder {
 public:
  PrecomputedImageEmbedder(std::filesystem::path dir, std::string model_id, std::size_t dim = 512);
  std::string model_id() const override { return model_id_; }
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(const ImageInput& image) override;

 private:
  std::filesystem::path dir_;
  std::string model_id_;
  std::size_t dim_;
};

}  // namespace scichat
