#pragma once

#include <span>
#include <string>
#include <string_view>

#include "scichat/corpus/document.hpp"

namespace scichat {

// `First, Last, et al. "Title"`, `Surname "Title"` for one author, `"Title"` for none.
// Throws Error(kInvalidArgument) when the title is empty.
std::string make_display_name(std::span<const Author> authors, std::string_view title);

// Separator placed between the display name and the chunk text.
inline constexpr std::string_view kDisplayNameSeparator = "\n";

std::string augment_chunk_text(std::string_view display_name, std::string_view raw_text);

}  // namespace scichat
