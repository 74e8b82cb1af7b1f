#include "scichat/projection/scatter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "scichat/common/csv.hpp"
#include "scichat/common/error.hpp"
#include "scichat/common/rng.hpp"

namespace scichat {
namespace {

constexpr std::array<std::string_view, 20> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5",
    "#c49c94", "#f7b6d2", "#dbdb8d", "#9edae5", "#393b79", "#637939"};

std::string xml_escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double min_x = -1.0, max_x = 1.0, min_y = -1.0, max_y = 1.0;
  double width, height, margin = 20.0;

  Frame(double w, double h, std::initializer_list<std::span<const double>> sets) : width(w), height(h) {
    bool first = true;
    for (const auto& coords : sets) {
      for (std::size_t i = 0; i + 1 < coords.size(); i += 2) {
        if (first) {
          min_x = max_x = coords[i];
          min_y = max_y = coords[i + 1];
          first = false;
        }
        min_x = std::min(min_x, coords[i]);
        max_x = std::max(max_x, coords[i]);
        min_y = std::min(min_y, coords[i + 1]);
        max_y = std::max(max_y, coords[i + 1]);
      }
    }
    if (max_x - min_x < 1e-12) { min_x -= 1.0; max_x += 1.0; }
    if (max_y - min_y < 1e-12) { min_y -= 1.0; max_y += 1.0; }
  }

  double x(double v) const { return margin + (v - min_x) / (max_x - min_x) * (width - 2 * margin); }
  double y(double v) const { return height - margin - (v - min_y) / (max_y - min_y) * (height - 2 * margin); }
};

void check_lengths(std::span<const double> coords, std::size_t n) {
  if (coords.size() != 2 * n) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("{} coordinates for {} labels", coords.size() / 2, n));
  }
}

std::string svg_open(const ScatterOptions& options) {
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n",
      options.width, options.height);
  if (!options.title.empty()) {
    out += fmt::format("<title>{}</title>\n", xml_escape(options.title));
  }
  return out;
}

// Grey points first so highlighted ones stay on top.
void draw_points(std::string& out, const Frame& frame, std::span<const double> coords,
                 std::span<const std::string> labels, const ScatterOptions& options, std::string_view css) {
  for (const bool highlighted : {false, true}) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (options.highlight.contains(labels[i]) != highlighted) continue;
      const auto color = highlighted ? highlight_color(options.highlight, labels[i]) : std::string(kDefaultPointColor);
      out += fmt::format("<circle class=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\"><title>{}</title></circle>\n",
                         css, frame.x(coords[2 * i]), frame.y(coords[2 * i + 1]), options.point_radius, color,
                         xml_escape(labels[i]));
    }
  }
}

}  // namespace

std::set<std::string> choose_highlight(std::span<const std::string> labels, std::size_t count, std::uint64_t seed) {
  std::set<std::string> distinct(labels.begin(), labels.end());
  std::vector<std::string> pool(distinct.begin(), distinct.end());
  Rng rng(seed);
  rng.shuffle(pool.begin(), pool.end());
  pool.resize(std::min(count, pool.size()));
  return {pool.begin(), pool.end()};
}

std::string highlight_color(const std::set<std::string>& highlight, const std::string& label) {
  const auto it = highlight.find(label);
  if (it == highlight.end()) return std::string(kDefaultPointColor);
  const auto index = static_cast<std::size_t>(std::distance(highlight.begin(), it));
  return std::string(kPalette[index % kPalette.size()]);
}

std::string render_scatter_svg(std::span<const double> coords, std::span<const std::string> labels,
                               const ScatterOptions& options) {
  check_lengths(coords, labels.size());
  const Frame frame(options.width, options.height, {coords});
  std::string out = svg_open(options);
  draw_points(out, frame, coords, labels, options, "point");
  out += "</svg>\n";
  return out;
}

std::string render_displacement_svg(std::span<const double> from, std::span<const double> to,
                                    std::span<const std::string> labels, const ScatterOptions& options) {
  check_lengths(from, labels.size());
  check_lengths(to, labels.size());
  const Frame frame(options.width, options.height, {from, to});
  std::string out = svg_open(options);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto color = options.highlight.contains(labels[i]) ? highlight_color(options.highlight, labels[i])
                                                             : std::string(kDefaultPointColor);
    out += fmt::format(
        "<line class=\"displacement\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"0.6\"/>\n",
        frame.x(from[2 * i]), frame.y(from[2 * i + 1]), frame.x(to[2 * i]), frame.y(to[2 * i + 1]), color);
  }
  draw_points(out, frame, to, labels, options, "point");
  out += "</svg>\n";
  return out;
}

std::string render_scatter_csv(std::span<const double> coords, std::span<const std::string> labels,
                               std::span<const std::int64_t> row_ids) {
  check_lengths(coords, labels.size());
  if (!row_ids.empty() && row_ids.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "row ids and labels differ in length");
  }
  std::ostringstream out;
  csv::write_row(out, {"row_id", "label", "x", "y"});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto id = row_ids.empty() ? static_cast<std::int64_t>(i) : row_ids[i];
    csv::write_row(out, {std::to_string(id), labels[i], fmt::format("{:.17g}", coords[2 * i]),
                         fmt::format("{:.17g}", coords[2 * i + 1])});
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace scichat
