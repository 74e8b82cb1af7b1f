#include "scichat/eval/judge.hpp"

#include <algorithm>
#include <cctype>

#include <spdlog/spdlog.h>

#include "scichat/common/error.hpp"
#include "scichat/common/parallel.hpp"
#include "scichat/common/utf8.hpp"

namespace scichat {
namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Count of standalone occurrences of `word` in `text`.
std::size_t count_word(std::string_view text, std::string_view word) {
  std::size_t count = 0;
  for (auto pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
    const bool left = pos == 0 || !is_word_char(text[pos - 1]);
    const auto end = pos + word.size();
    const bool right = end == text.size() || !is_word_char(text[end]);
    if (left && right) ++count;
  }
  return count;
}

}  // namespace

std::optional<Choice> parse_choice(std::string_view reply) {
  const auto text = lowercase(reply);
  std::size_t a = 0;
  std::size_t b = 0;
  for (const std::string_view noun : {"publication ", "paper ", "document "}) {
    a += count_word(text, std::string(noun) + "a");
    b += count_word(text, std::string(noun) + "b");
  }
  if (a > 0 && b > 0) return std::nullopt;

  std::size_t start = 0;
  while (start < text.size() && !is_word_char(text[start])) ++start;
  std::string_view head = std::string_view(text).substr(start);
  for (const std::string_view noun : {"publication ", "paper ", "document ", "option "}) {
    if (head.starts_with(noun)) {
      head.remove_prefix(noun.size());
      break;
    }
  }
  if (!head.empty() && (head[0] == 'a' || head[0] == 'b') && (head.size() == 1 || !is_word_char(head[1]))) {
    return head[0] == 'a' ? Choice::kA : Choice::kB;
  }
  if (a > 0) return Choice::kA;
  if (b > 0) return Choice::kB;
  return std::nullopt;
}

std::string judge_text(const DocumentRecord& doc, std::size_t max_chars) {
  std::string text = doc.title;
  if (!doc.abstract_text.empty()) text += "\n" + doc.abstract_text;
  if (!doc.body_text.empty()) text += "\n" + doc.body_text;
  return std::string(utf8::prefix(text, max_chars));
}

std::size_t JudgeOptions::side_chars() const {
  budget.validate();
  const auto overhead = utf8::scalar_count(instruction) + 64;
  const auto available = budget.available();
  return available > overhead ? (available - overhead) / 2 : 0;
}

Choice judge_pair(const std::string& doc_a_text, const std::string& doc_b_text, ChatProvider& llm,
                  const JudgeOptions& options) {
  const auto side = options.side_chars();
  const auto prompt = options.instruction + "\n\nPublication A:\n" +
                      std::string(utf8::prefix(doc_a_text, side)) + "\n\nPublication B:\n" +
                      std::string(utf8::prefix(doc_b_text, side));
  std::string reply;
  for (int attempt = 0; attempt < 2; ++attempt) {
    reply = complete_prompt(llm, prompt, options.temperature, options.retry);
    if (const auto choice = parse_choice(reply)) return *choice;
  }
  throw Error(ErrorCode::kJudgment, "unparseable judgment: '" + std::string(utf8::prefix(reply, 80)) + "'");
}

Choice LengthJudge::judge(const std::string& a, const std::string& b) {
  const auto la = utf8::scalar_count(a);
  const auto lb = utf8::scalar_count(b);
  if (la != lb) return la > lb ? Choice::kA : Choice::kB;
  return a >= b ? Choice::kA : Choice::kB;
}

ComparisonRun run_comparisons(std::span<const DocPair> pairs,
                              const std::map<std::string, std::string>& texts, PairJudge& judge,
                              std::size_t workers) {
  for (const auto& [a, b] : pairs) {
    for (const auto* id : {&a, &b}) {
      if (!texts.contains(*id)) throw Error(ErrorCode::kNotFound, "no text for document " + *id);
    }
  }

  std::vector<std::optional<Choice>> choices(pairs.size());
  std::vector<std::string> errors(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    try {
      choices[i] = judge.judge(texts.at(pairs[i].first), texts.at(pairs[i].second));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kJudgment && e.code() != ErrorCode::kProviderPermanent &&
          e.code() != ErrorCode::kProviderTransient) {
        throw;
      }
      errors[i] = e.what();
    }
  });

  ComparisonRun run;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    if (!choices[i]) {
      spdlog::warn("comparison {} vs {} skipped: {}", a, b, errors[i]);
      run.failures.push_back({pairs[i], errors[i]});
      continue;
    }
    run.records.push_back({a, b, *choices[i] == Choice::kA ? a : b, judge.kind()});
  }
  return run;
}

}  // namespace scichat
