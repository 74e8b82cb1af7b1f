#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scichat/common/concurrency.hpp"
#include "scichat/common/http.hpp"
#include "scichat/common/retry.hpp"

namespace scichat {

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  std::optional<int> max_tokens;
};

using DeltaCallback = std::function<void(std::string_view delta)>;

// Chat-completion model behind a provider API.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  virtual std::string model_id() const = 0;

  virtual std::string complete(const CompletionRequest& request) = 0;

  // Emits the reply incrementally. The default emits the whole reply once.
  virtual std::string stream(const CompletionRequest& request, const DeltaCallback& on_delta) {
    auto text = complete(request);
    if (on_delta) on_delta(text);
    return text;
  }
};

inline constexpr double kMinTemperature = 0.0;
inline constexpr double kMaxTemperature = 2.0;

// Throws Error(kInvalidArgument) outside [kMinTemperature, kMaxTemperature].
void check_temperature(double temperature);

// One user message, retried on transient failures.
std::string complete_prompt(ChatProvider& provider, const std::string& prompt, double temperature,
                            const RetryPolicy& retry = {});

class HttpChatProvider : public ChatProvider {
 public:
  struct Options {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-3.5-turbo";
    std::string api_key;
    int max_concurrency = 4;
  };

  HttpChatProvider(Options options, std::shared_ptr<HttpTransport> transport);

  std::string model_id() const override { return options_.model; }
  std::string complete(const CompletionRequest& request) override;

 private:
  Options options_;
  std::shared_ptr<HttpTransport> transport_;
  ConcurrencyLimiter limiter_;
};

// Deterministic provider for tests and offline runs: replies with fn(prompt),
// where prompt is the concatenated message contents.
class StubChatProvider : public ChatProvider {
 public:
  using Reply = std::function<std::string(const std::string& prompt)>;

  explicit StubChatProvider(Reply reply, std::string model_id = "stub");

  std::string model_id() const override { return model_id_; }
  std::string complete(const CompletionRequest& request) override;
  std::string stream(const CompletionRequest& request, const DeltaCallback& on_delta) override;

  std::size_t call_count() const { return calls_.load(); }

 private:
  Reply reply_;
  std::string model_id_;
  std::atomic<std::size_t> calls_{0};
};

// Concatenated message contents, separated by blank lines.
std::string flatten_messages(const std::vector<ChatMessage>& messages);

// Named stubs used by the CLI and tests.
namespace stubs {
// Number of "\n---\n" chunk separators in the prompt.
StubChatProvider::Reply count_chunks();
// First n scalar values of the text after the first blank line.
StubChatProvider::Reply echo_prefix(std::size_t n);
StubChatProvider::Reply constant(std::string reply);
}  // namespace stubs

}  // namespace scichat
