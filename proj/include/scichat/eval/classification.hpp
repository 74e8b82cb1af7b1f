#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scichat/corpus/document.hpp"
#include "scichat/llm/chat_provider.hpp"
#include "scichat/store/records.hpp"

namespace scichat {

// Row = ground truth, column = prediction.
struct ConfusionMatrix {
  std::vector<std::string> categories;
  std::vector<std::vector<std::size_t>> counts;

  // Throws Error(kInvalidArgument) unless counts is categories.size() square.
  void validate() const;
  std::size_t total() const;
  std::size_t index_of(std::string_view category) const;
};

struct CategoryMetrics {
  std::string category;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  // nullopt where the denominator is zero.
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> accuracy;
};

// One-vs-rest counts and ratios for one category.
CategoryMetrics confusion_metrics(const ConfusionMatrix& matrix, std::size_t category);
CategoryMetrics confusion_metrics(const ConfusionMatrix& matrix, std::string_view category);
std::vector<CategoryMetrics> all_metrics(const ConfusionMatrix& matrix);

// Maps an LLM reply onto a category: exact (case-insensitive) match, else the
// single category named in the reply, else "Other" when that is a category.
// nullopt for blank or otherwise unparseable replies.
std::optional<std::string> parse_category(std::string_view reply, std::span<const std::string> categories);

struct ClassifyOptions {
  std::size_t max_text_chars = 6000;
  double temperature = 1.0;
  RetryPolicy retry;
  std::size_t workers = 4;
};

std::string classification_prompt(const DocumentRecord& doc, std::span<const std::string> categories,
                                   std::size_t max_text_chars);

// One record per document, in input order. Provider failures after retries are
// recorded as abstentions with the error text as the reply.
std::vector<ClassificationRecord> classify_documents(std::span<const DocumentRecord> docs,
                                                     std::span<const std::string> categories,
                                                     ChatProvider& llm, const ClassifyOptions& options = {});

struct ClassificationTally {
  ConfusionMatrix matrix;
  std::vector<std::string> abstentions;  // no parseable prediction; outside the matrix
  std::vector<std::string> unlabeled;    // predicted but missing from the ground truth
};

// Throws Error(kInvalidArgument) for ground-truth labels outside the categories.
ClassificationTally tally(std::span<const std::string> categories,
                          const std::map<std::string, std::string>& truth,
                          std::span<const ClassificationRecord> predictions);

// One category per non-empty line; '#' starts a comment.
std::vector<std::string> read_categories(const std::filesystem::path& path);

// CSV with header doc_id,label.
std::map<std::string, std::string> read_truth_csv(const std::filesystem::path& path);

// Pearson correlation and least-squares line of y on x.
struct LinearFit {
  std::size_t n = 0;
  double slope = 0.0;
  double intercept = 0.0;
  std::optional<double> r;
  std::optional<double> r_squared;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Correlates ranking position (0 = lowest, scaled to [0, 1]) with an external
// impact figure per document, e.g. journal impact factor. Documents without an
// impact value are ignored.
LinearFit impact_correlation(std::span<const std::string> ordering,
                             const std::map<std::string, double>& impact);

// CSV with header doc_id,impact.
std::map<std::string, double> read_impact_csv(const std::filesystem::path& path);

}  // namespace scichat
