#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scichat/common/concurrency.hpp"
#include "scichat/common/http.hpp"
#include "scichat/common/retry.hpp"
#include "scichat/embedding/vector.hpp"

namespace scichat {

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;

  virtual std::string model_id() const = 0;
  virtual std::size_t dim() const = 0;
  // Longest accepted input, in Unicode scalar values.
  virtual std::size_t max_input_chars() const { return 32000; }

  // Embeds the whole batch in one provider request; output order matches input.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;
};

struct EmbedOptions {
  std::size_t batch_size = 64;
  RetryPolicy retry;
};

// Batches, retries transient failures and validates the provider output.
// A permanent failure is re-raised as ProviderError with item_index set to the
// position of the offending text.
std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, TextEmbedder& provider,
                                         const EmbedOptions& options = {});

EmbeddingVector embed_text(const std::string& text, TextEmbedder& provider,
                           const EmbedOptions& options = {});

// Unit-norm pseudorandom vector seeded by a hash of (text, dim, seed).
EmbeddingVector mock_embed(std::string_view text, std::size_t dim, std::uint64_t seed = 0);

class MockTextEmbedder : public TextEmbedder {
 public:
  explicit MockTextEmbedder(std::size_t dim = 1536, std::uint64_t seed = 0);

  std::string model_id() const override;
  std::size_t dim() const override { return dim_; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

  // Pins the vector returned for `text`; used to place a query near a known chunk.
  void plant(std::string text, std::vector<float> values);

  std::size_t request_count() const { return requests_.load(); }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::map<std::string, std::vector<float>, std::less<>> planted_;
  mutable std::mutex mutex_;
  std::atomic<std::size_t> requests_{0};
};

// Signed feature hashing of lowercase alphanumeric tokens, L2-normalized.
// Texts sharing words land close together, which makes offline demos usable.
class HashingTextEmbedder : public TextEmbedder {
 public:
  explicit HashingTextEmbedder(std::size_t dim = 1536) : dim_(dim) {}

  std::string model_id() const override;
  std::size_t dim() const override { return dim_; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

 private:
  std::size_t dim_;
};

// Client for an OpenAI-compatible POST {base_url}/embeddings endpoint.
class HttpTextEmbedder : public TextEmbedder {
 public:
  struct Options {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "text-embedding-ada-002";
    std::string api_key;
    std::size_t dim = 1536;
    std::size_t max_input_chars = 8191 * 4;
    std::ptrdiff_t max_concurrency = 4;
  };

  HttpTextEmbedder(Options options, std::shared_ptr<HttpTransport> transport);

  std::string model_id() const override { return options_.model; }
  std::size_t dim() const override { return options_.dim; }
  std::size_t max_input_chars() const override { return options_.max_input_chars; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

 private:
  Options options_;
  std::shared_ptr<HttpTransport> transport_;
  ConcurrencyLimiter limiter_;
};

}  // namespace scichat
