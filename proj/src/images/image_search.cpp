#include "scichat/images/image_search.hpp"

#include <fstream>
#include <iterator>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "scichat/common/csv.hpp"
#include "scichat/common/error.hpp"
#include "scichat/common/parallel.hpp"

namespace scichat {
namespace {

const csv::Row kManifestHeader = {"path", "kind", "doc_id", "figure_label", "group_key", "caption"};

std::optional<std::string> field(const csv::Row& row, std::size_t i) {
  if (i >= row.size() || row[i].empty()) return std::nullopt;
  return row[i];
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string default_group_key(const std::filesystem::path& image_path) {
  return image_path.parent_path().filename().string();
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  const auto rows = csv::read_file(manifest.string());
  if (rows.empty() || rows[0] != kManifestHeader) {
    throw Error(ErrorCode::kFormat, manifest.string() + ": expected header path,kind,doc_id,figure_label,group_key,caption");
  }
  const auto base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    const auto where = manifest.string() + " row " + std::to_string(i + 1);
    if (row.empty() || row[0].empty()) throw Error(ErrorCode::kFormat, where + ": missing path");
    ManifestEntry e;
    e.path = row[0];
    if (e.path.is_relative()) e.path = base / e.path;
    try {
      e.kind = row.size() > 1 && !row[1].empty() ? parse_image_kind(row[1]) : ImageKind::kRaw;
    } catch (const Error&) {
      throw Error(ErrorCode::kFormat, where + ": kind must be figure or raw");
    }
    e.doc_id = field(row, 2);
    e.figure_label = field(row, 3);
    e.group_key = field(row, 4);
    e.caption = field(row, 5);
    if (e.kind == ImageKind::kFigure && !e.doc_id) throw Error(ErrorCode::kFormat, where + ": figure without doc_id");
    if (e.kind == ImageKind::kRaw && !e.group_key) e.group_key = default_group_key(e.path);
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& manifest, std::span<const ManifestEntry> entries) {
  std::ofstream out(manifest, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + manifest.string());
  csv::write_row(out, kManifestHeader);
  for (const auto& e : entries) {
    csv::write_row(out, {e.path.string(), std::string(to_string(e.kind)), e.doc_id.value_or(""),
                         e.figure_label.value_or(""), e.group_key.value_or(""), e.caption.value_or("")});
  }
}

ImageIngestCounts ingest_images(std::span<const ManifestEntry> entries, ImageEmbedder& provider,
                                DocumentStore& store, const ImageIngestOptions& options) {
  std::vector<std::optional<EmbeddingVector>> vectors(entries.size());
  std::vector<std::string> errors(entries.size());
  parallel_for(entries.size(), options.workers, [&](std::size_t i) {
    const auto& e = entries[i];
    try {
      const ImageInput input{e.path.filename().string(), read_bytes(e.path)};
      auto result = embed_images(std::span<const ImageInput>(&input, 1), provider, options.retry);
      if (result[0].ok()) {
        vectors[i] = std::move(result[0].vector);
      } else {
        errors[i] = result[0].error;
      }
    } catch (const Error& err) {
      errors[i] = err.what();
    }
  });

  ImageIngestCounts counts;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (vectors[i]) {
      try {
        ImageRecord record{0, e.kind, e.doc_id, e.figure_label, e.group_key, e.caption, e.path.string()};
        store.upsert_image(record, *vectors[i]);
        ++counts.ok;
        continue;
      } catch (const Error& err) {
        errors[i] = err.what();
      }
    }
    spdlog::warn("image {} skipped: {}", e.path.string(), errors[i]);
    ++counts.failed;
    counts.errors.emplace_back(e.path.string(), errors[i]);
  }
  return counts;
}

ImageIngestCounts ingest_images(std::span<const std::filesystem::path> paths, ImageKind kind,
                                const GroupKeyFn& group_key, ImageEmbedder& provider, DocumentStore& store,
                                const ImageIngestOptions& options) {
  std::vector<ManifestEntry> entries;
  entries.reserve(paths.size());
  for (const auto& p : paths) {
    ManifestEntry e;
    e.path = p;
    e.kind = kind;
    e.group_key = group_key ? group_key(p) : std::optional<std::string>(default_group_key(p));
    entries.push_back(std::move(e));
  }
  return ingest_images(entries, provider, store, options);
}

std::vector<ImageHit> ImageSearch::run(std::span<const float> query, const ImageSearchOptions& options,
                                       std::optional<ImageId> self) const {
  const auto matrix = matrices_.images(model_id_);
  if (matrix->empty() || options.k == 0) return {};

  RowExclusion exclude;
  if (self || options.exclude_group) {
    std::unordered_map<ImageId, std::optional<std::string>> groups;
    if (options.exclude_group) {
      for (const auto& r : store_.images(matrix->row_ids)) groups.emplace(r.image_id, r.group_key);
    }
    exclude = [self, groups = std::move(groups), &options](std::int64_t id) {
      if (self && id == *self) return true;
      if (!options.exclude_group) return false;
      const auto it = groups.find(id);
      return it != groups.end() && it->second == options.exclude_group;
    };
  }

  const auto hits = top_k(query, *matrix, options.k, options.measure, exclude);
  std::vector<ImageId> ids;
  for (const auto& h : hits) ids.push_back(h.row_id);
  const auto records = store_.images(ids);
  std::vector<ImageHit> out;
  for (std::size_t i = 0; i < hits.size(); ++i) out.push_back({hits[i], records[i]});
  return out;
}

std::vector<ImageHit> ImageSearch::by_vector(const EmbeddingVector& query, const ImageSearchOptions& options) const {
  return run(query.values, options, std::nullopt);
}

std::vector<ImageHit> ImageSearch::by_id(ImageId image_id, ImageSearchOptions options, bool exclude_same_group) const {
  const auto record = store_.get_image(image_id);
  if (!record) throw Error(ErrorCode::kNotFound, "unknown image id " + std::to_string(image_id));
  const auto vector = store_.image_vector(image_id, model_id_);
  if (!vector) {
    throw Error(ErrorCode::kNotFound, "image " + std::to_string(image_id) + " has no vector for " + model_id_);
  }
  if (exclude_same_group && record->group_key) options.exclude_group = record->group_key;
  return run(vector->values, options, image_id);
}

std::vector<ImageHit> ImageSearch::by_image(const ImageInput& image, ImageEmbedder& provider,
                                            const ImageSearchOptions& options, const RetryPolicy& retry) const {
  auto result = embed_images(std::span<const ImageInput>(&image, 1), provider, retry);
  if (!result[0].ok()) throw Error(ErrorCode::kInvalidArgument, "cannot embed query image: " + result[0].error);
  if (provider.model_id() != model_id_) {
    throw Error(ErrorCode::kInvalidArgument, "query model " + provider.model_id() + " differs from " + model_id_);
  }
  return run(result[0].vector->values, options, std::nullopt);
}

}  // namespace scichat
