#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scichat/corpus/document.hpp"
#include "scichat/eval/ranking.hpp"
#include "scichat/llm/chat_provider.hpp"
#include "scichat/prompt/prompt_builder.hpp"
#include "scichat/store/records.hpp"

namespace scichat {

enum class Choice { kA, kB };

inline constexpr std::string_view kDefaultJudgeInstruction =
    "Two scientific publications are shown below as Publication A and Publication B. "
    "Select which publication is higher impact. Reply with the single letter A or B.";

// "A", "B", "Publication A", "**B**.", ... Returns nullopt when the reply names
// neither or both.
std::optional<Choice> parse_choice(std::string_view reply);

// Title, abstract and as much main text as fits in max_chars scalar values.
std::string judge_text(const DocumentRecord& doc, std::size_t max_chars);

struct JudgeOptions {
  std::string instruction{kDefaultJudgeInstruction};
  PromptBudget budget;
  double temperature = 1.0;
  RetryPolicy retry;

  // Scalar values available to each side: half of what the instruction leaves.
  std::size_t side_chars() const;
};

// Asks the LLM once, and once more if the reply is unparseable; then throws
// Error(kJudgment).
Choice judge_pair(const std::string& doc_a_text, const std::string& doc_b_text, ChatProvider& llm,
                  const JudgeOptions& options = {});

class PairJudge {
 public:
  virtual ~PairJudge() = default;
  virtual JudgeKind kind() const = 0;
  virtual Choice judge(const std::string& doc_a_text, const std::string& doc_b_text) = 0;
};

class LlmJudge : public PairJudge {
 public:
  LlmJudge(ChatProvider& llm, JudgeOptions options = {}) : llm_(llm), options_(std::move(options)) {}
  JudgeKind kind() const override { return JudgeKind::kLlm; }
  Choice judge(const std::string& a, const std::string& b) override {
    return judge_pair(a, b, llm_, options_);
  }

 private:
  ChatProvider& llm_;
  JudgeOptions options_;
};

// Deterministic oracle: the longer text wins; equal lengths fall back to the
// lexicographically greater text, so presentation order never matters.
class LengthJudge : public PairJudge {
 public:
  JudgeKind kind() const override { return JudgeKind::kOracle; }
  Choice judge(const std::string& a, const std::string& b) override;
};

struct PairFailure {
  DocPair pair;
  std::string message;
};

struct ComparisonRun {
  std::vector<ComparisonRecord> records;
  std::vector<PairFailure> failures;  // judgment errors; those pairs are skipped
};

// Judges every pair (in parallel up to `workers`), keeping input order.
ComparisonRun run_comparisons(std::span<const DocPair> pairs,
                              const std::map<std::string, std::string>& texts, PairJudge& judge,
                              std::size_t workers = 4);

}  // namespace scichat
