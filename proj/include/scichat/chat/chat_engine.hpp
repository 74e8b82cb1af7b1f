#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scichat/chat/session.hpp"
#include "scichat/embedding/text_embedder.hpp"
#include "scichat/llm/chat_provider.hpp"
#include "scichat/prompt/prompt_builder.hpp"
#include "scichat/store/document_store.hpp"
#include "scichat/store/matrix_cache.hpp"

namespace scichat {

struct ProvenanceEntry {
  ChunkId chunk_id = 0;
  double score = 0.0;

  bool operator==(const ProvenanceEntry&) const = default;
};

struct LatencyBreakdown {
  double retrieval_ms = 0.0;
  double assembly_ms = 0.0;
  double completion_ms = 0.0;
};

struct ChatAnswer {
  std::string response_text;
  std::vector<ProvenanceEntry> provenance;  // the prompt's included chunks, in prompt order
  std::size_t prompt_char_count = 0;
  std::size_t prompt_est_tokens = 0;
  LatencyBreakdown latency;
  std::string model_id;
  double temperature = 1.0;
  CorpusMode mode = CorpusMode::kRaw;
  std::optional<std::string> session_id;
  // Set when no chunk embeddings exist for the active model.
  bool empty_corpus = false;
  std::vector<std::string> warnings;
};

struct QueryOptions {
  std::size_t k_cap = 10;
  CorpusMode mode = CorpusMode::kRaw;
  double temperature = 1.0;
  std::optional<std::string> session_id;
};

struct ChatEngineConfig {
  std::string instruction{kDefaultInstruction};
  PromptBudget budget;
  // Prior turns of a session placed in the prompt; 0 keeps every query fresh.
  std::size_t history_turns = 0;
  EmbedOptions embed;
  RetryPolicy retry;
};

// Query answering: embed, retrieve by cosine, assemble the prompt, complete.
class ChatEngine {
 public:
  ChatEngine(DocumentStore& store, MatrixCache& matrices, TextEmbedder& embedder, ChatProvider& llm,
             ChatEngineConfig config = {});

  // Throws Error(kInvalidArgument) for an empty query or out-of-range
  // temperature and ProviderError when a provider fails after retries.
  // on_delta, when set, receives the reply as it streams.
  ChatAnswer answer_query(std::string_view query, const QueryOptions& options = {},
                          const DeltaCallback& on_delta = {});

  // Retrieval and assembly only; no completion call.
  AssembledPrompt build_prompt(std::string_view query, const QueryOptions& options = {},
                               bool* empty_corpus = nullptr);

  SessionStore& sessions() { return sessions_; }
  const ChatEngineConfig& config() const { return config_; }

 private:
  struct Candidates {
    std::vector<PromptCandidate> raw;
    std::vector<PromptCandidate> summary;
    bool empty_corpus = false;
  };

  Candidates retrieve(std::string_view query, const QueryOptions& options);
  AssembledPrompt assemble(std::string_view query, const QueryOptions& options,
                           const Candidates& candidates) const;
  std::string history_block(const QueryOptions& options) const;

  DocumentStore& store_;
  MatrixCache& matrices_;
  TextEmbedder& embedder_;
  ChatProvider& llm_;
  ChatEngineConfig config_;
  SessionStore sessions_;
};

}  // namespace scichat
