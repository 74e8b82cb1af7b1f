#include "scichat/embedding/image_embedder.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "scichat/common/error.hpp"
#include "scichat/common/hash.hpp"
#include "scichat/common/rng.hpp"
#include "scichat/common/utf8.hpp"

namespace scichat {
namespace {

bool starts_with(std::string_view bytes, std::string_view signature) {
  return bytes.substr(0, signature.size()) == signature;
}

}  // namespace

ImageFormat detect_image_format(std::string_view bytes) {
  using namespace std::string_view_literals;
  if (starts_with(bytes, "\x89PNG\r\n\x1a\n"sv)) return ImageFormat::kPng;
  if (starts_with(bytes, "\xFF\xD8\xFF"sv)) return ImageFormat::kJpeg;
  if (starts_with(bytes, "GIF87a"sv) || starts_with(bytes, "GIF89a"sv)) return ImageFormat::kGif;
  if (starts_with(bytes, "BM"sv) && bytes.size() > 14) return ImageFormat::kBmp;
  if (starts_with(bytes, "II*\0"sv) || starts_with(bytes, "MM\0*"sv)) return ImageFormat::kTiff;
  if (starts_with(bytes, "RIFF"sv) && bytes.size() >= 12 && bytes.substr(8, 4) == "WEBP"sv) {
    return ImageFormat::kWebp;
  }
  return ImageFormat::kUnknown;
}

std::string_view mime_type(ImageFormat format) {
  switch (format) {
    case ImageFormat::kPng: return "image/png";
    case ImageFormat::kJpeg: return "image/jpeg";
    case ImageFormat::kGif: return "image/gif";
    case ImageFormat::kBmp: return "image/bmp";
    case ImageFormat::kTiff: return "image/tiff";
    case ImageFormat::kWebp: return "image/webp";
    case ImageFormat::kUnknown: break;
  }
  return "application/octet-stream";
}

std::vector<ImageEmbedResult> embed_images(std::span<const ImageInput> images,
                                           ImageEmbedder& provider, const RetryPolicy& retry) {
  std::vector<ImageEmbedResult> results;
  results.reserve(images.size());
  for (const auto& image : images) {
    ImageEmbedResult result;
    if (detect_image_format(image.bytes) == ImageFormat::kUnknown) {
      result.error = image.name + ": not a decodable image";
      results.push_back(std::move(result));
      continue;
    }
    try {
      auto vector = retry_call(retry, [&] { return provider.embed(image); });
      vector.validate();
      if (vector.dim() != provider.dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "image vector has dim " + std::to_string(vector.dim()));
      }
      result.vector = std::move(vector);
    } catch (const Error& e) {
      result.error = image.name + ": " + e.what();
    }
    results.push_back(std::move(result));
  }
  return results;
}

std::string MockImageEmbedder::model_id() const { return "mock-image-" + std::to_string(dim_); }

EmbeddingVector MockImageEmbedder::embed(const ImageInput& image) {
  const std::uint64_t key = splitmix64(fnv1a64(image.bytes) ^ splitmix64(dim_));
  Rng rng(key);
  // CLIP outputs are not unit-norm; give each image its own scale.
  const double scale = 5.0 + 10.0 * rng.uniform01();
  std::vector<float> values(dim_);
  for (float& x : values) x = static_cast<float>(scale * rng.normal() / 22.6);
  return {std::move(values), model_id()};
}

HttpImageEmbedder::HttpImageEmbedder(Options options, std::shared_ptr<HttpTransport> transport)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      limiter_(options_.max_concurrency) {}

EmbeddingVector HttpImageEmbedder::embed(const ImageInput& image) {
  HttpHeaders headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);
  HttpResponse response;
  {
    auto permit = limiter_.acquire();
    response = transport_->post(options_.url, image.bytes,
                                std::string(mime_type(detect_image_format(image.bytes))), headers);
  }
  if (response.status != 200) {
    const auto message = "image provider returned HTTP " + std::to_string(response.status) + ": " +
                         std::string(utf8::prefix(response.body, 300));
    if (is_retryable_status(response.status)) throw transient_error(message, response.status);
    throw permanent_error(message, response.status);
  }
  try {
    const auto body = nlohmann::json::parse(response.body);
    const auto& values = body.contains("embedding") ? body.at("embedding")
                                                    : body.at("data").at(0).at("embedding");
    return {values.get<std::vector<float>>(), options_.model};
  } catch (const nlohmann::json::exception& e) {
    throw permanent_error(std::string("malformed image embedding response: ") + e.what());
  }
}

PrecomputedImageEmbedder::PrecomputedImageEmbedder(std::filesystem::path dir, std::string model_id,
                                                   std::size_t dim)
    : dir_(std::move(dir)), model_id_(std::move(model_id)), dim_(dim) {}

EmbeddingVector PrecomputedImageEmbedder::embed(const ImageInput& image) {
  const auto name = std::filesystem::path(image.name).filename().string();
  const auto path = dir_ / (name + ".f32");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw permanent_error("no precomputed vector at " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != dim_ * sizeof(float)) {
    throw permanent_error(path.string() + " holds " + std::to_string(bytes.size()) +
                          " bytes, expected " + std::to_string(dim_ * sizeof(float)));
  }
  std::vector<float> values(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[i * 4 + b])) << (8 * b);
    }
    values[i] = std::bit_cast<float>(bits);
  }
  return {std::move(values), model_id_};
}

}  // namespace scichat
