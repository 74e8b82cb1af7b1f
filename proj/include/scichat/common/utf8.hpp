#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace scichat::utf8 {

// Byte offset of every Unicode scalar value in `text`, followed by text.size().
// Throws Error(kInvalidArgument) on malformed UTF-8.
std::vector<std::size_t> scalar_offsets(std::string_view text);

std::size_t scalar_count(std::string_view text);

bool is_valid(std::string_view text);

// Slice [start, end) in scalar values, given offsets from scalar_offsets().
inline std::string_view slice(std::string_view text, const std::vector<std::size_t>& offsets,
                              std::size_t start, std::size_t end) {
  return text.substr(offsets[start], offsets[end] - offsets[start]);
}

// First `max_scalars` scalar values of text.
std::string_view prefix(std::string_view text, std::size_t max_scalars);

void append(std::string& out, char32_t scalar);

std::string encode(char32_t scalar);

bool is_blank(std::string_view text);

// Collapses every run of ASCII whitespace into a single space and trims both ends.
std::string collapse_whitespace(std::string_view text);

std::size_t count_words(std::string_view text);

}  // namespace scichat::utf8
