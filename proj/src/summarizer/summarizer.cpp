#include "scichat/summarizer/summarizer.hpp"

#include <chrono>
#include <ctime>

#include <spdlog/spdlog.h>

#include "scichat/common/error.hpp"
#include "scichat/common/parallel.hpp"
#include "scichat/common/utf8.hpp"

namespace scichat {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::optional<std::string> summarize_chunk(const TextChunk& chunk, ChatProvider& llm,
                                           const SummarizerOptions& options) {
  if (chunk.kind != ChunkKind::kRaw) {
    throw Error(ErrorCode::kInvalidArgument, "only raw chunks are summarized");
  }
  if (utf8::is_blank(chunk.raw_text)) return std::nullopt;
  const auto prompt = options.instruction + "\n\n" + chunk.raw_text;
  return complete_prompt(llm, prompt, options.temperature, options.retry);
}

double compression_ratio(std::size_t summary_chunks, std::size_t raw_chunks) {
  return raw_chunks == 0 ? 0.0 : static_cast<double>(summary_chunks) / static_cast<double>(raw_chunks);
}

SummaryCorpus build_summary_corpus(const DocumentRecord& doc, std::span<const TextChunk> raw_chunks,
                                   ChatProvider& llm, const SummarizerOptions& options) {
  options.chunking.validate();
  if (raw_chunks.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "document " + doc.doc_id + " has no raw chunks");
  }

  struct Slot {
    std::optional<std::string> text;
    bool skipped = false;
    std::optional<ProviderError> provider_error;
    std::string error;
  };
  std::vector<Slot> slots(raw_chunks.size());
  parallel_for(raw_chunks.size(), options.workers, [&](std::size_t i) {
    auto& slot = slots[i];
    try {
      slot.text = summarize_chunk(raw_chunks[i], llm, options);
      slot.skipped = !slot.text;
    } catch (const ProviderError& e) {
      slot.provider_error = e;
      slot.error = e.what();
    }
  });

  SummaryCorpus corpus;
  corpus.doc_id = doc.doc_id;
  corpus.raw_chunks = raw_chunks.size();
  const std::string created_at = options.clock ? options.clock() : utc_timestamp();
  std::size_t attempted = 0;
  const ProviderError* first_provider_error = nullptr;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& slot = slots[i];
    const auto& chunk = raw_chunks[i];
    if (slot.skipped) {
      ++corpus.skipped;
      continue;
    }
    ++attempted;
    if (!slot.text) {
      corpus.failures.push_back({chunk.chunk_id, slot.error});
      if (slot.provider_error && !first_provider_error) first_provider_error = &*slot.provider_error;
      spdlog::warn("summary of chunk {} ({}#{}) failed: {}", chunk.chunk_id, chunk.doc_id, chunk.ordinal,
                   slot.error);
      continue;
    }
    if (!corpus.summary_document.empty()) corpus.summary_document += "\n\n";
    corpus.summary_document += *slot.text;
    corpus.records.push_back({chunk.chunk_id, llm.model_id(), created_at, *slot.text});
  }

  if (corpus.failures.size() * 2 > attempted) {
    const auto message = std::to_string(corpus.failures.size()) + " of " + std::to_string(attempted) +
                         " chunk summaries failed for " + doc.doc_id + ": " + corpus.failures.front().message;
    if (first_provider_error) {
      throw ProviderError(first_provider_error->code(), message, first_provider_error->status());
    }
    throw Error(ErrorCode::kProviderPermanent, message);
  }

  corpus.chunks = chunk_document(doc.doc_id, doc.display_name, corpus.summary_document, options.chunking,
                                 ChunkKind::kSummary);
  return corpus;
}

}  // namespace scichat
