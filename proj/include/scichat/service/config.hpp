#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "scichat/chat/chat_engine.hpp"
#include "scichat/corpus/chunker.hpp"
#include "scichat/corpus/pdf_converter.hpp"
#include "scichat/embedding/image_embedder.hpp"
#include "scichat/embedding/text_embedder.hpp"
#include "scichat/images/image_search.hpp"
#include "scichat/llm/chat_provider.hpp"
#include "scichat/prompt/prompt_builder.hpp"
#include "scichat/store/document_store.hpp"
#include "scichat/store/matrix_cache.hpp"
#include "scichat/summarizer/summarizer.hpp"

namespace scichat {

struct AppConfig {
  std::string store_path = "scichat.db";
  std::filesystem::path cache_dir = "cache";

  ChunkingParams chunking;
  PromptBudget budget;
  std::string instruction{kDefaultInstruction};
  CorpusMode mode = CorpusMode::kRaw;

  struct Embedding {
    std::string provider = "http";  // http | mock | hashing
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "text-embedding-ada-002";
    std::size_t dim = 1536;
    std::string api_key;
    std::size_t batch_size = 64;
    int max_concurrency = 4;
    std::uint64_t seed = 0;
  } embedding;

  struct Llm {
    std::string provider = "http";  // http | stub
    std::string stub = "count";     // count | echo | constant text
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-3.5-turbo";
    std::string api_key;
    double temperature = 1.0;
    int max_concurrency = 4;
  } llm;

  struct Images {
    std::string provider = "mock";  // http | mock | precomputed
    std::string url;
    std::string model = "ViT-B/32";
    std::size_t dim = 512;
    std::filesystem::path dir;
  } images;

  std::string grobid_url = "http://localhost:8070";
  std::string summary_instruction{kDefaultSummaryInstruction};
  std::size_t k_cap = 10;
  std::size_t history_turns = 0;
  int retry_attempts = 5;
  int retry_base_delay_ms = 500;
  std::string server_addr = "127.0.0.1:8080";
  std::filesystem::path static_dir;
};

using Environment = std::map<std::string, std::string>;

// The process environment as a map.
Environment process_environment();

// INI-style key = value file with [section] headers. Unknown keys are
// rejected. SCICHAT_<SECTION>_<KEY> variables override file values, and the
// provider API keys fall back to OPENAI_API_KEY. An empty path loads defaults.
AppConfig load_config(const std::filesystem::path& path, const Environment& env = process_environment());

// Parses "host:port"; throws Error(kInvalidArgument) when the port is missing.
std::pair<std::string, int> parse_addr(const std::string& addr);

RetryPolicy make_retry_policy(const AppConfig& config);

// Every long-lived object a CLI command or the server needs.
struct AppContext {
  AppConfig config;
  std::unique_ptr<DocumentStore> store;
  std::unique_ptr<MatrixCache> matrices;
  std::shared_ptr<HttpTransport> transport;
  std::unique_ptr<TextEmbedder> embedder;
  std::unique_ptr<ChatProvider> llm;
  std::unique_ptr<ImageEmbedder> image_embedder;
  std::unique_ptr<PdfConverter> converter;
  std::unique_ptr<ChatEngine> engine;
  std::unique_ptr<ImageSearch> images;

  static std::unique_ptr<AppContext> create(AppConfig config);

  EmbedOptions embed_options() const;
};

}  // namespace scichat
