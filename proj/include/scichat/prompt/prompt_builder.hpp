#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scichat/corpus/document.hpp"

namespace scichat {

struct PromptBudget {
  std::size_t total_chars = 16384;
  std::size_t response_reserve_chars = 3564;
  std::size_t chars_per_token = 4;

  // Throws Error(kInvalidArgument) unless reserve < total and chars_per_token >= 1.
  void validate() const;
  std::size_t available() const { return total_chars - response_reserve_chars; }
};

// ceil(scalar_count(text) / chars_per_token).
std::size_t estimate_tokens(std::string_view text, std::size_t chars_per_token = 4);

enum class CorpusMode { kRaw, kSummary, kBoth };

std::string_view to_string(CorpusMode mode);
CorpusMode parse_corpus_mode(std::string_view text);

// A retrieved chunk with the text that goes into the prompt.
struct PromptCandidate {
  ChunkId chunk_id = 0;
  double score = 0.0;
  ChunkKind kind = ChunkKind::kRaw;
  std::string text;
};

inline constexpr std::string_view kChunkSeparator = "\n---\n";
inline constexpr std::string_view kQueryPrefix = "Query: ";
inline constexpr std::string_view kDefaultInstruction =
    "Answer the user's query using the text extracts from scientific publications given below. "
    "Each extract begins with the name of its source document; cite sources by that name. "
    "If the extracts do not contain the answer, say so.";

struct PromptOptions {
  std::string instruction{kDefaultInstruction};
  // Prior conversation turns, rendered after the instruction; counts against the budget.
  std::string history;
  PromptBudget budget;
};

struct AssembledPrompt {
  std::string instruction;
  std::vector<ChunkId> included_chunks;
  std::vector<double> included_scores;
  std::string query;
  std::string rendered;
  std::size_t char_count = 0;  // scalar values in `rendered`
  std::size_t est_tokens = 0;
};

// Orders candidates for the prompt: descending score, raw before summary on
// ties, then ascending chunk id. kRaw and kSummary keep only their own list.
std::vector<PromptCandidate> merge_candidates(std::span<const PromptCandidate> raw,
                                              std::span<const PromptCandidate> summary,
                                              CorpusMode mode);

// Greedy fill in the given order: a chunk that would overflow the budget is
// skipped and later ones are still tried. Byte-identical texts are included once.
// Throws Error(kInvalidArgument) for an empty query and Error(kBudget) when the
// instruction, history and query alone exceed budget.available().
AssembledPrompt assemble_prompt(std::string_view query, std::span<const PromptCandidate> ordered,
                                const PromptOptions& options = {});

AssembledPrompt assemble_prompt(std::string_view query, std::span<const PromptCandidate> raw,
                                std::span<const PromptCandidate> summary, CorpusMode mode,
                                const PromptOptions& options = {});

}  // namespace scichat
