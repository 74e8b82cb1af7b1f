#include "scichat/embedding/text_embedder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>

#include "scichat/common/error.hpp"
#include "scichat/common/hash.hpp"
#include "scichat/common/rng.hpp"
#include "scichat/common/utf8.hpp"

namespace scichat {
namespace {

void normalize(std::vector<double>& values) {
  double sum = 0.0;
  for (const double x : values) sum += x * x;
  if (sum <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sum);
  for (double& x : values) x *= inv;
}

std::vector<float> to_float(const std::vector<double>& values) {
  return {values.begin(), values.end()};
}

void check_batch(std::span<const std::string> texts, const std::vector<EmbeddingVector>& out,
                 std::size_t expected_dim, std::size_t offset) {
  if (out.size() != texts.size()) {
    throw permanent_error("provider returned " + std::to_string(out.size()) + " vectors for " +
                          std::to_string(texts.size()) + " inputs");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    try {
      out[i].validate();
    } catch (const Error& e) {
      throw ProviderError(ErrorCode::kProviderPermanent, e.what(), 0, offset + i);
    }
    if (expected_dim != 0 && out[i].dim() != expected_dim) {
      throw ProviderError(ErrorCode::kProviderPermanent,
                          "provider returned dim " + std::to_string(out[i].dim()) + ", expected " +
                              std::to_string(expected_dim),
                          0, offset + i);
    }
  }
}

}  // namespace

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, TextEmbedder& provider,
                                         const EmbedOptions& options) {
  if (texts.empty()) return {};
  const std::size_t limit = provider.max_input_chars();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (utf8::is_blank(texts[i])) {
      throw Error(ErrorCode::kInvalidArgument, "text " + std::to_string(i) + " is empty");
    }
    const auto length = utf8::scalar_count(texts[i]);
    if (length > limit) {
      throw Error(ErrorCode::kInvalidArgument,
                  "text " + std::to_string(i) + " has " + std::to_string(length) +
                      " characters, provider limit is " + std::to_string(limit));
    }
  }

  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  std::vector<EmbeddingVector> result;
  result.reserve(texts.size());
  std::size_t dim = 0;
  for (std::size_t start = 0; start < texts.size(); start += batch_size) {
    const auto batch = texts.subspan(start, std::min(batch_size, texts.size() - start));
    std::vector<EmbeddingVector> vectors;
    try {
      vectors = retry_call(options.retry, [&] { return provider.embed_batch(batch); });
    } catch (const ProviderError& e) {
      if (e.transient() || e.item_index()) {
        if (e.item_index() && *e.item_index() < batch.size()) {
          throw ProviderError(e.code(), e.what(), e.status(), start + *e.item_index());
        }
        throw;
      }
      // Permanent rejection of a batch: find the first item the provider refuses.
      for (std::size_t i = 0; i < batch.size(); ++i) {
        try {
          retry_call(options.retry, [&] { return provider.embed_batch(batch.subspan(i, 1)); });
        } catch (const ProviderError& single) {
          throw ProviderError(single.code(),
                              "text " + std::to_string(start + i) + " rejected: " + single.what(),
                              single.status(), start + i);
        }
      }
      throw ProviderError(e.code(), e.what(), e.status(), start);
    }
    check_batch(batch, vectors, dim == 0 ? provider.dim() : dim, start);
    if (dim == 0 && !vectors.empty()) dim = vectors.front().dim();
    for (auto& v : vectors) result.push_back(std::move(v));
  }
  return result;
}

EmbeddingVector embed_text(const std::string& text, TextEmbedder& provider,
                           const EmbedOptions& options) {
  auto vectors = embed_texts(std::span<const std::string>(&text, 1), provider, options);
  return std::move(vectors.front());
}

EmbeddingVector mock_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  const std::uint64_t key = splitmix64(fnv1a64(text) ^ splitmix64(dim) ^ splitmix64(seed + 1));
  Rng rng(key);
  std::vector<double> values(std::max<std::size_t>(dim, 1));
  for (double& x : values) x = rng.normal();
  normalize(values);
  return {to_float(values), "mock-" + std::to_string(dim)};
}

MockTextEmbedder::MockTextEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

std::string MockTextEmbedder::model_id() const { return "mock-" + std::to_string(dim_); }

std::vector<EmbeddingVector> MockTextEmbedder::embed_batch(std::span<const std::string> texts) {
  ++requests_;
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::lock_guard lock(mutex_);
  for (const auto& text : texts) {
    if (const auto it = planted_.find(text); it != planted_.end()) {
      out.push_back({it->second, model_id()});
    } else {
      auto v = mock_embed(text, dim_, seed_);
      v.model_id = model_id();
      out.push_back(std::move(v));
    }
  }
  return out;
}

void MockTextEmbedder::plant(std::string text, std::vector<float> values) {
  if (values.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "planted vector has wrong dimension");
  }
  std::lock_guard lock(mutex_);
  planted_[std::move(text)] = std::move(values);
}

std::string HashingTextEmbedder::model_id() const { return "hashing-" + std::to_string(dim_); }

std::vector<EmbeddingVector> HashingTextEmbedder::embed_batch(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> values(dim_, 0.0);
    std::string token;
    auto flush = [&] {
      if (token.size() < 2) {
        token.clear();
        return;
      }
      const auto h = splitmix64(fnv1a64(token));
      values[h % dim_] += (h >> 63) != 0 ? -1.0 : 1.0;
      token.clear();
    };
    for (const char ch : text) {
      const auto c = static_cast<unsigned char>(ch);
      if (std::isalnum(c) != 0 || c >= 0x80) {
        token.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
    }
    flush();
    normalize(values);
    // An all-stopword text would otherwise be the zero vector.
    if (std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0; })) {
      values[fnv1a64(text) % dim_] = 1.0;
    }
    out.push_back({to_float(values), model_id()});
  }
  return out;
}

HttpTextEmbedder::HttpTextEmbedder(Options options, std::shared_ptr<HttpTransport> transport)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      limiter_(options_.max_concurrency) {}

std::vector<EmbeddingVector> HttpTextEmbedder::embed_batch(std::span<const std::string> texts) {
  nlohmann::json request = {{"model", options_.model},
                            {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  HttpHeaders headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  HttpResponse response;
  {
    auto permit = limiter_.acquire();
    response = transport_->post(join_url(options_.base_url, "/embeddings"), request.dump(),
                                "application/json", headers);
  }
  if (response.status != 200) {
    const auto message = "embedding provider returned HTTP " + std::to_string(response.status) +
                         ": " + std::string(utf8::prefix(response.body, 300));
    if (is_retryable_status(response.status)) throw transient_error(message, response.status);
    throw permanent_error(message, response.status);
  }

  try {
    const auto body = nlohmann::json::parse(response.body);
    const auto& data = body.at("data");
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> seen(texts.size(), false);
    for (std::size_t pos = 0; pos < data.size(); ++pos) {
      const auto& item = data[pos];
      const std::size_t index = item.contains("index") ? item.at("index").get<std::size_t>() : pos;
      if (index >= out.size() || seen[index]) {
        throw permanent_error("embedding response has an invalid index");
      }
      seen[index] = true;
      out[index] = {item.at("embedding").get<std::vector<float>>(), options_.model};
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw permanent_error("embedding response is missing vectors");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw permanent_error(std::string("malformed embedding response: ") + e.what());
  }
}

}  // namespace scichat
