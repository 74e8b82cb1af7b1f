#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace scichat {

inline constexpr std::string_view kDefaultPointColor = "#b0b0b0";

struct ScatterOptions {
  std::set<std::string> highlight;  // labels drawn in colour; everything else is grey
  double width = 800.0;
  double height = 800.0;
  double point_radius = 2.5;
  std::string title;
};

// Up to `count` distinct labels chosen uniformly at random.
std::set<std::string> choose_highlight(std::span<const std::string> labels, std::size_t count,
                                       std::uint64_t seed);

// Colour assigned to each highlighted label, in label order from a fixed palette.
std::string highlight_color(const std::set<std::string>& highlight, const std::string& label);

// coords is n x 2. Throws Error(kInvalidArgument) when labels.size() != n.
std::string render_scatter_svg(std::span<const double> coords, std::span<const std::string> labels,
                               const ScatterOptions& options = {});

// Segments from `from[i]` to `to[i]` plus both point sets.
std::string render_displacement_svg(std::span<const double> from, std::span<const double> to,
                                    std::span<const std::string> labels, const ScatterOptions& options = {});

// Header: row_id,label,x,y (row_ids may be empty, then the row index is written).
std::string render_scatter_csv(std::span<const double> coords, std::span<const std::string> labels,
                               std::span<const std::int64_t> row_ids = {});

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace scichat
