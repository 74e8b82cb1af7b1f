#include "scichat/chat/chat_engine.hpp"

#include <spdlog/spdlog.h>

#include "scichat/common/error.hpp"
#include "scichat/common/timer.hpp"
#include "scichat/common/utf8.hpp"
#include "scichat/retrieval/retrieval.hpp"

namespace scichat {

ChatEngine::ChatEngine(DocumentStore& store, MatrixCache& matrices, TextEmbedder& embedder,
                       ChatProvider& llm, ChatEngineConfig config)
    : store_(store), matrices_(matrices), embedder_(embedder), llm_(llm), config_(std::move(config)) {
  config_.budget.validate();
}

std::string ChatEngine::history_block(const QueryOptions& options) const {
  if (!options.session_id || config_.history_turns == 0) return {};
  const auto turns = sessions_.recent(*options.session_id, config_.history_turns);
  if (turns.empty()) return {};
  std::string block = "Conversation so far:";
  for (const auto& t : turns) {
    block += "\nUser: " + t.query;
    block += "\nAssistant: " + t.response_text;
  }
  return block;
}

ChatEngine::Candidates ChatEngine::retrieve(std::string_view query, const QueryOptions& options) {
  if (utf8::is_blank(query)) throw Error(ErrorCode::kInvalidArgument, "query is empty");
  const auto query_vector = embed_text(std::string(query), embedder_, config_.embed);

  const auto candidates_for = [&](ChunkKind kind) {
    std::vector<PromptCandidate> out;
    const auto matrix = matrices_.chunks(kind, embedder_.model_id());
    if (matrix->empty()) return out;
    const auto hits = top_k(query_vector, *matrix, options.k_cap, SimilarityMeasure::kCosine);
    std::vector<ChunkId> ids;
    for (const auto& h : hits) ids.push_back(h.row_id);
    const auto chunks = store_.fetch_chunks(ids);
    for (std::size_t i = 0; i < hits.size(); ++i) {
      out.push_back({hits[i].row_id, hits[i].score, kind, chunks[i].chunk.augmented_text});
    }
    return out;
  };

  Candidates candidates;
  if (options.mode != CorpusMode::kSummary) candidates.raw = candidates_for(ChunkKind::kRaw);
  if (options.mode != CorpusMode::kRaw) candidates.summary = candidates_for(ChunkKind::kSummary);
  candidates.empty_corpus = candidates.raw.empty() && candidates.summary.empty();
  return candidates;
}

AssembledPrompt ChatEngine::assemble(std::string_view query, const QueryOptions& options,
                                     const Candidates& candidates) const {
  PromptOptions prompt_options{config_.instruction, history_block(options), config_.budget};
  return assemble_prompt(query, candidates.raw, candidates.summary, options.mode, prompt_options);
}

AssembledPrompt ChatEngine::build_prompt(std::string_view query, const QueryOptions& options,
                                         bool* empty_corpus) {
  const auto candidates = retrieve(query, options);
  if (empty_corpus) *empty_corpus = candidates.empty_corpus;
  return assemble(query, options, candidates);
}

ChatAnswer ChatEngine::answer_query(std::string_view query, const QueryOptions& options,
                                    const DeltaCallback& on_delta) {
  check_temperature(options.temperature);
  if (utf8::is_blank(query)) throw Error(ErrorCode::kInvalidArgument, "query is empty");

  ChatAnswer answer;
  answer.model_id = llm_.model_id();
  answer.temperature = options.temperature;
  answer.mode = options.mode;
  answer.session_id = options.session_id;

  Stopwatch clock;
  const auto candidates = retrieve(query, options);
  answer.latency.retrieval_ms = clock.elapsed_ms();
  clock.reset();
  const auto prompt = assemble(query, options, candidates);
  answer.latency.assembly_ms = clock.elapsed_ms();
  clock.reset();

  answer.empty_corpus = candidates.empty_corpus;
  if (answer.empty_corpus) {
    answer.warnings.push_back("no chunk embeddings are stored for model " + embedder_.model_id() +
                              "; answering without context");
    spdlog::warn("{}", answer.warnings.back());
  }
  for (std::size_t i = 0; i < prompt.included_chunks.size(); ++i) {
    answer.provenance.push_back({prompt.included_chunks[i], prompt.included_scores[i]});
  }
  answer.prompt_char_count = prompt.char_count;
  answer.prompt_est_tokens = prompt.est_tokens;

  CompletionRequest request{{{"user", prompt.rendered}}, options.temperature, std::nullopt};
  if (on_delta) {
    bool emitted = false;
    const DeltaCallback forward = [&](std::string_view delta) {
      emitted = true;
      on_delta(delta);
    };
    answer.response_text = retry_call(config_.retry, [&] {
      try {
        return llm_.stream(request, forward);
      } catch (const ProviderError& e) {
        // A partially delivered stream cannot be replayed.
        if (emitted) throw Error(e.code(), e.what());
        throw;
      }
    });
  } else {
    answer.response_text = retry_call(config_.retry, [&] { return llm_.complete(request); });
  }
  answer.latency.completion_ms = clock.elapsed_ms();

  if (options.session_id) sessions_.append(*options.session_id, {std::string(query), answer.response_text});
  return answer;
}

}  // namespace scichat
