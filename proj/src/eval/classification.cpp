#include "scichat/eval/classification.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "scichat/common/csv.hpp"
#include "scichat/common/error.hpp"
#include "scichat/common/parallel.hpp"
#include "scichat/common/utf8.hpp"

namespace scichat {
namespace {

std::string fold(std::string_view text) {
  std::string out;
  for (const char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != ' ') {
      out += ' ';
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<std::vector<std::string>> read_csv_with_header(const std::filesystem::path& path,
                                                           std::string_view first, std::string_view second) {
  auto rows = csv::read_file(path.string());
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != first || rows[0][1] != second) {
    throw Error(ErrorCode::kFormat,
                path.string() + ": expected header " + std::string(first) + "," + std::string(second));
  }
  rows.erase(rows.begin());
  for (const auto& row : rows) {
    if (row.size() < 2) throw Error(ErrorCode::kFormat, path.string() + ": short row");
  }
  return rows;
}

}  // namespace

void ConfusionMatrix::validate() const {
  if (categories.empty()) throw Error(ErrorCode::kInvalidArgument, "no categories");
  if (counts.size() != categories.size()) throw Error(ErrorCode::kInvalidArgument, "matrix is not square");
  for (const auto& row : counts) {
    if (row.size() != categories.size()) throw Error(ErrorCode::kInvalidArgument, "matrix is not square");
  }
}

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) {
    for (const auto c : row) sum += c;
  }
  return sum;
}

std::size_t ConfusionMatrix::index_of(std::string_view category) const {
  const auto it = std::find(categories.begin(), categories.end(), category);
  if (it == categories.end()) throw Error(ErrorCode::kNotFound, "unknown category " + std::string(category));
  return static_cast<std::size_t>(it - categories.begin());
}

CategoryMetrics confusion_metrics(const ConfusionMatrix& matrix, std::size_t category) {
  matrix.validate();
  if (category >= matrix.categories.size()) throw Error(ErrorCode::kInvalidArgument, "category index out of range");
  CategoryMetrics m;
  m.category = matrix.categories[category];
  const std::size_t c = category;
  const std::size_t total = matrix.total();
  m.tp = matrix.counts[c][c];
  for (std::size_t i = 0; i < matrix.counts.size(); ++i) {
    if (i == c) continue;
    m.fp += matrix.counts[i][c];
    m.fn += matrix.counts[c][i];
  }
  m.tn = total - m.tp - m.fp - m.fn;
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.accuracy = ratio(m.tp + m.tn, total);
  return m;
}

CategoryMetrics confusion_metrics(const ConfusionMatrix& matrix, std::string_view category) {
  return confusion_metrics(matrix, matrix.index_of(category));
}

std::vector<CategoryMetrics> all_metrics(const ConfusionMatrix& matrix) {
  std::vector<CategoryMetrics> out;
  for (std::size_t c = 0; c < matrix.categories.size(); ++c) out.push_back(confusion_metrics(matrix, c));
  return out;
}

std::optional<std::string> parse_category(std::string_view reply, std::span<const std::string> categories) {
  const auto folded = fold(reply);
  if (folded.empty()) return std::nullopt;
  for (const auto& c : categories) {
    if (fold(c) == folded) return c;
  }
  const std::string padded = " " + folded + " ";
  std::optional<std::string> named;
  for (const auto& c : categories) {
    const auto key = fold(c);
    if (key.empty() || padded.find(" " + key + " ") == std::string::npos) continue;
    if (named) {
      named.reset();
      break;
    }
    named = c;
  }
  if (named) return named;
  for (const auto& c : categories) {
    if (fold(c) == "other") return c;
  }
  return std::nullopt;
}

std::string classification_prompt(const DocumentRecord& doc, std::span<const std::string> categories,
                                   std::size_t max_text_chars) {
  std::string list;
  for (const auto& c : categories) {
    if (!list.empty()) list += ", ";
    list += c;
  }
  std::string text = doc.title;
  if (!doc.abstract_text.empty()) text += "\n" + doc.abstract_text;
  if (!doc.body_text.empty()) text += "\n" + doc.body_text;
  return "Classify the following scientific publication into exactly one of these categories: " + list +
         ". Reply with the category name only.\n\n" + std::string(utf8::prefix(text, max_text_chars));
}

std::vector<ClassificationRecord> classify_documents(std::span<const DocumentRecord> docs,
                                                     std::span<const std::string> categories,
                                                     ChatProvider& llm, const ClassifyOptions& options) {
  if (categories.empty()) throw Error(ErrorCode::kInvalidArgument, "no categories");
  std::vector<ClassificationRecord> out(docs.size());
  parallel_for(docs.size(), options.workers, [&](std::size_t i) {
    auto& record = out[i];
    record.doc_id = docs[i].doc_id;
    record.model_id = llm.model_id();
    try {
      record.reply = complete_prompt(llm, classification_prompt(docs[i], categories, options.max_text_chars),
                                     options.temperature, options.retry);
      record.predicted = parse_category(record.reply, categories);
    } catch (const ProviderError& e) {
      record.reply = std::string("error: ") + e.what();
    }
  });
  return out;
}

ClassificationTally tally(std::span<const std::string> categories,
                          const std::map<std::string, std::string>& truth,
                          std::span<const ClassificationRecord> predictions) {
  ClassificationTally result;
  result.matrix.categories.assign(categories.begin(), categories.end());
  result.matrix.counts.assign(categories.size(), std::vector<std::size_t>(categories.size(), 0));
  result.matrix.validate();
  for (const auto& [doc, label] : truth) {
    if (std::find(categories.begin(), categories.end(), label) == categories.end()) {
      throw Error(ErrorCode::kInvalidArgument, "ground truth for " + doc + " uses unknown category " + label);
    }
  }
  for (const auto& p : predictions) {
    const auto it = truth.find(p.doc_id);
    if (it == truth.end()) {
      result.unlabeled.push_back(p.doc_id);
      continue;
    }
    if (!p.predicted) {
      result.abstentions.push_back(p.doc_id);
      continue;
    }
    const auto row = result.matrix.index_of(it->second);
    const auto col = result.matrix.index_of(*p.predicted);
    ++result.matrix.counts[row][col];
  }
  return result;
}

std::vector<std::string> read_categories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto text = utf8::collapse_whitespace(line);
    if (text.empty()) continue;
    if (std::find(out.begin(), out.end(), text) != out.end()) {
      throw Error(ErrorCode::kFormat, path.string() + ": duplicate category " + text);
    }
    out.push_back(std::move(text));
  }
  if (out.empty()) throw Error(ErrorCode::kFormat, path.string() + ": no categories");
  return out;
}

std::map<std::string, std::string> read_truth_csv(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& row : read_csv_with_header(path, "doc_id", "label")) out[row[0]] = row[1];
  return out;
}

std::map<std::string, double> read_impact_csv(const std::filesystem::path& path) {
  std::map<std::string, double> out;
  for (const auto& row : read_csv_with_header(path, "doc_id", "impact")) {
    try {
      out[row[0]] = std::stod(row[1]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat, path.string() + ": bad impact value '" + row[1] + "'");
    }
  }
  return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kInvalidArgument, "x and y differ in length");
  LinearFit fit;
  fit.n = x.size();
  if (fit.n < 2) return fit;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(fit.n);
  my /= static_cast<double>(fit.n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    fit.r = sxy / std::sqrt(sxx * syy);
    fit.r_squared = *fit.r * *fit.r;
  }
  return fit;
}

LinearFit impact_correlation(std::span<const std::string> ordering, const std::map<std::string, double>& impact) {
  std::vector<double> x;
  std::vector<double> y;
  const double scale = ordering.size() > 1 ? static_cast<double>(ordering.size() - 1) : 1.0;
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    const auto it = impact.find(ordering[i]);
    if (it == impact.end()) continue;
    x.push_back(static_cast<double>(i) / scale);
    y.push_back(it->second);
  }
  return linear_fit(x, y);
}

}  // namespace scichat
