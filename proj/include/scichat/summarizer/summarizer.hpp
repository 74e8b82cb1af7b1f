#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scichat/common/retry.hpp"
#include "scichat/corpus/chunker.hpp"
#include "scichat/corpus/document.hpp"
#include "scichat/llm/chat_provider.hpp"
#include "scichat/store/records.hpp"

namespace scichat {

inline constexpr std::string_view kDefaultSummaryInstruction =
    "Summarize the following text extract from a scientific publication in a concise way.";

struct SummarizerOptions {
  std::string instruction{kDefaultSummaryInstruction};
  ChunkingParams chunking;
  double temperature = 1.0;
  std::size_t workers = 4;
  RetryPolicy retry;
  // UTC timestamp stamped on each summary; replaceable for reproducible tests.
  std::function<std::string()> clock;
};

// Summary of one raw chunk. nullopt means the chunk was blank and the LLM was
// not called. Provider failures propagate after retries.
std::optional<std::string> summarize_chunk(const TextChunk& chunk, ChatProvider& llm,
                                           const SummarizerOptions& options = {});

struct ChunkFailure {
  ChunkId chunk_id = 0;
  std::string message;
};

struct SummaryCorpus {
  std::string doc_id;
  std::string summary_document;     // summaries joined by a blank line, in ordinal order
  std::vector<TextChunk> chunks;    // kind == kSummary, name-prepended
  std::vector<SummaryRecord> records;
  std::vector<ChunkFailure> failures;
  std::size_t raw_chunks = 0;
  std::size_t skipped = 0;
};

// Summarizes every raw chunk, concatenates the results and re-chunks them.
// Failed chunks leave gaps; Error(kProviderTransient or kProviderPermanent) is
// thrown when more than half of the attempted chunks failed.
SummaryCorpus build_summary_corpus(const DocumentRecord& doc, std::span<const TextChunk> raw_chunks,
                                   ChatProvider& llm, const SummarizerOptions& options = {});

// summary_chunks / raw_chunks, or 0 for an empty corpus.
double compression_ratio(std::size_t summary_chunks, std::size_t raw_chunks);

std::string utc_timestamp();

}  // namespace scichat
