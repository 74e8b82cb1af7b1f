#include "scichat/corpus/display_name.hpp"

#include "scichat/common/error.hpp"

namespace scichat {
namespace {

std::string name_of(const Author& author) {
  return author.surname.empty() ? author.forename : author.surname;
}

}  // namespace

std::string make_display_name(std::span<const Author> authors, std::string_view title) {
  if (title.empty()) throw Error(ErrorCode::kInvalidArgument, "display name needs a title");
  const std::string quoted = "\"" + std::string(title) + "\"";
  if (authors.empty()) return quoted;
  if (authors.size() == 1) return name_of(authors.front()) + " " + quoted;
  return name_of(authors.front()) + ", " + name_of(authors.back()) + ", et al. " + quoted;
}

std::string augment_chunk_text(std::string_view display_name, std::string_view raw_text) {
  std::string out;
  out.reserve(display_name.size() + kDisplayNameSeparator.size() + raw_text.size());
  out.append(display_name);
  out.append(kDisplayNameSeparator);
  out.append(raw_text);
  return out;
}

}  // namespace scichat
