#include "scichat/prompt/prompt_builder.hpp"

#include <algorithm>
#include <unordered_set>

#include "scichat/common/error.hpp"
#include "scichat/common/utf8.hpp"

namespace scichat {

void PromptBudget::validate() const {
  if (chars_per_token < 1) throw Error(ErrorCode::kInvalidArgument, "chars_per_token must be at least 1");
  if (response_reserve_chars >= total_chars) {
    throw Error(ErrorCode::kInvalidArgument, "response reserve must be smaller than the total budget");
  }
}

std::size_t estimate_tokens(std::string_view text, std::size_t chars_per_token) {
  if (chars_per_token < 1) throw Error(ErrorCode::kInvalidArgument, "chars_per_token must be at least 1");
  const auto n = utf8::scalar_count(text);
  return (n + chars_per_token - 1) / chars_per_token;
}

std::string_view to_string(CorpusMode mode) {
  switch (mode) {
    case CorpusMode::kRaw: return "raw";
    case CorpusMode::kSummary: return "summary";
    case CorpusMode::kBoth: return "both";
  }
  return "raw";
}

CorpusMode parse_corpus_mode(std::string_view text) {
  if (text == "raw") return CorpusMode::kRaw;
  if (text == "summary") return CorpusMode::kSummary;
  if (text == "both") return CorpusMode::kBoth;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(text) + "' (raw|summary|both)");
}

std::vector<PromptCandidate> merge_candidates(std::span<const PromptCandidate> raw,
                                              std::span<const PromptCandidate> summary,
                                              CorpusMode mode) {
  std::vector<PromptCandidate> out;
  if (mode != CorpusMode::kSummary) out.insert(out.end(), raw.begin(), raw.end());
  if (mode != CorpusMode::kRaw) out.insert(out.end(), summary.begin(), summary.end());
  std::stable_sort(out.begin(), out.end(), [](const PromptCandidate& a, const PromptCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.kind != b.kind) return a.kind == ChunkKind::kRaw;
    return a.chunk_id < b.chunk_id;
  });
  return out;
}

AssembledPrompt assemble_prompt(std::string_view query, std::span<const PromptCandidate> ordered,
                                const PromptOptions& options) {
  options.budget.validate();
  if (utf8::is_blank(query)) throw Error(ErrorCode::kInvalidArgument, "query is empty");

  AssembledPrompt prompt;
  prompt.instruction = options.instruction;
  prompt.query = std::string(query);

  std::string head = options.instruction + "\n\n";
  if (!options.history.empty()) head += options.history + "\n\n";
  const std::string tail = std::string(kQueryPrefix) + prompt.query;

  const std::size_t available = options.budget.available();
  std::size_t used = utf8::scalar_count(head) + utf8::scalar_count(tail);
  if (used > available) {
    throw Error(ErrorCode::kBudget, "instruction and query need " + std::to_string(used) +
                                        " characters but only " + std::to_string(available) +
                                        " are available");
  }

  const std::size_t separator = utf8::scalar_count(kChunkSeparator);
  std::unordered_set<std::string_view> seen;
  std::string body;
  for (const auto& c : ordered) {
    if (seen.contains(c.text)) continue;
    const std::size_t cost = utf8::scalar_count(c.text) + separator;
    if (used + cost > available) continue;
    used += cost;
    seen.insert(c.text);
    body += c.text;
    body += kChunkSeparator;
    prompt.included_chunks.push_back(c.chunk_id);
    prompt.included_scores.push_back(c.score);
  }

  prompt.rendered = head + body + tail;
  prompt.char_count = used;
  prompt.est_tokens = estimate_tokens(prompt.rendered, options.budget.chars_per_token);
  return prompt;
}

AssembledPrompt assemble_prompt(std::string_view query, std::span<const PromptCandidate> raw,
                                std::span<const PromptCandidate> summary, CorpusMode mode,
                                const PromptOptions& options) {
  const auto merged = merge_candidates(raw, summary, mode);
  return assemble_prompt(query, merged, options);
}

}  // namespace scichat
