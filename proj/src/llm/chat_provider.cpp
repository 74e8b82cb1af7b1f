#include "scichat/llm/chat_provider.hpp"

#include <nlohmann/json.hpp>

#include "scichat/common/error.hpp"
#include "scichat/common/utf8.hpp"

namespace scichat {

void check_temperature(double temperature) {
  if (!(temperature >= kMinTemperature && temperature <= kMaxTemperature)) {
    throw Error(ErrorCode::kInvalidArgument,
                "temperature " + std::to_string(temperature) + " is outside [0, 2]");
  }
}

std::string complete_prompt(ChatProvider& provider, const std::string& prompt, double temperature,
                            const RetryPolicy& retry) {
  check_temperature(temperature);
  CompletionRequest request{{{"user", prompt}}, temperature, std::nullopt};
  return retry_call(retry, [&] { return provider.complete(request); });
}

std::string flatten_messages(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += "\n\n";
    out += m.content;
  }
  return out;
}

HttpChatProvider::HttpChatProvider(Options options, std::shared_ptr<HttpTransport> transport)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      limiter_(options_.max_concurrency) {}

std::string HttpChatProvider::complete(const CompletionRequest& request) {
  check_temperature(request.temperature);
  nlohmann::json body = {{"model", options_.model}, {"temperature", request.temperature}};
  auto& messages = body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  if (request.max_tokens) body["max_tokens"] = *request.max_tokens;

  HttpHeaders headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  HttpResponse response;
  {
    auto permit = limiter_.acquire();
    response = transport_->post(join_url(options_.base_url, "/chat/completions"), body.dump(),
                                "application/json", headers);
  }
  if (response.status != 200) {
    const auto message = "chat provider returned HTTP " + std::to_string(response.status) + ": " +
                         std::string(utf8::prefix(response.body, 300));
    if (is_retryable_status(response.status)) throw transient_error(message, response.status);
    throw permanent_error(message, response.status);
  }
  try {
    const auto reply = nlohmann::json::parse(response.body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw permanent_error(std::string("malformed chat response: ") + e.what());
  }
}

StubChatProvider::StubChatProvider(Reply reply, std::string model_id)
    : reply_(std::move(reply)), model_id_(std::move(model_id)) {}

std::string StubChatProvider::complete(const CompletionRequest& request) {
  ++calls_;
  return reply_(flatten_messages(request.messages));
}

std::string StubChatProvider::stream(const CompletionRequest& request, const DeltaCallback& on_delta) {
  auto text = complete(request);
  if (!on_delta) return text;
  // Word-sized deltas so streaming consumers see more than one event.
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find(' ', start);
    end = end == std::string::npos ? text.size() : end + 1;
    on_delta(std::string_view(text).substr(start, end - start));
    start = end;
  }
  return text;
}

namespace stubs {

StubChatProvider::Reply count_chunks() {
  return [](const std::string& prompt) {
    std::size_t count = 0;
    for (auto pos = prompt.find("\n---\n"); pos != std::string::npos; pos = prompt.find("\n---\n", pos + 1)) {
      ++count;
    }
    return std::to_string(count);
  };
}

StubChatProvider::Reply echo_prefix(std::size_t n) {
  return [n](const std::string& prompt) {
    const auto split = prompt.find("\n\n");
    const std::string_view tail =
        split == std::string::npos ? std::string_view(prompt) : std::string_view(prompt).substr(split + 2);
    return std::string(utf8::prefix(tail, n));
  };
}

StubChatProvider::Reply constant(std::string reply) {
  return [reply = std::move(reply)](const std::string&) { return reply; };
}

}  // namespace stubs
}  // namespace scichat
