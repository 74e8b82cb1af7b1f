#include "scichat/service/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <spdlog/spdlog.h>

#include "scichat/common/error.hpp"
#include "scichat/corpus/tei_parser.hpp"

namespace scichat {
namespace {

std::vector<std::filesystem::path> files_with_extension(const std::filesystem::path& dir, std::string_view ext) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

IngestReport ingest_tei(std::string_view xml, const std::string& source_path, DocumentStore& store,
                        TextEmbedder& embedder, const IngestOptions& options) {
  options.chunking.validate();
  ParsedDocument parsed;
  bool empty_body = false;
  try {
    parsed = parse_tei(xml, source_path);
  } catch (const EmptyDocumentError& e) {
    spdlog::warn("{}: {}; recording without chunks", source_path.empty() ? "<upload>" : source_path, e.what());
    parsed = e.partial();
    empty_body = true;
  }

  const auto chunks = chunk_document(parsed.document, options.chunking);
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.augmented_text);
  const auto vectors = embed_texts(texts, embedder, options.embed);

  IngestReport report;
  report.doc_id = parsed.document.doc_id;
  report.source = source_path;
  report.empty_body = empty_body || chunks.empty();
  report.counts = store.upsert_document(parsed.document, chunks, vectors, parsed.figures);
  return report;
}

IngestSummary ingest_tei_directory(const std::filesystem::path& dir, DocumentStore& store,
                                   TextEmbedder& embedder, const IngestOptions& options) {
  IngestSummary summary;
  for (const auto& path : files_with_extension(dir, ".xml")) {
    try {
      summary.documents.push_back(ingest_tei(read_file(path), path.string(), store, embedder, options));
    } catch (const Error& e) {
      spdlog::error("{}: {}", path.string(), e.what());
      summary.failures.push_back({path.string(), e.what()});
    }
  }
  return summary;
}

IngestSummary ingest_pdf_directory(const std::filesystem::path& dir, PdfConverter& converter,
                                   DocumentStore& store, TextEmbedder& embedder,
                                   const IngestOptions& options, bool keep_tei) {
  IngestSummary summary;
  for (const auto& path : files_with_extension(dir, ".pdf")) {
    try {
      const auto xml = converter.convert(path);
      if (keep_tei) {
        auto tei_path = path;
        tei_path.replace_extension(".tei.xml");
        std::ofstream(tei_path, std::ios::binary) << xml;
      }
      summary.documents.push_back(ingest_tei(xml, path.string(), store, embedder, options));
    } catch (const Error& e) {
      spdlog::error("{}: {}", path.string(), e.what());
      summary.failures.push_back({path.string(), e.what()});
    }
  }
  return summary;
}

SummaryReport summarize_document(const std::string& doc_id, DocumentStore& store, ChatProvider& llm,
                                 TextEmbedder& embedder, const SummarizerOptions& summarizer,
                                 const EmbedOptions& embed) {
  const auto doc = store.get_document(doc_id);
  if (!doc) throw Error(ErrorCode::kNotFound, "unknown document " + doc_id);
  const auto raw = store.document_chunks(doc_id, ChunkKind::kRaw);

  SummaryReport report;
  report.doc_id = doc_id;
  report.raw_chunks = raw.size();
  if (raw.empty()) return report;

  const auto corpus = build_summary_corpus(*doc, raw, llm, summarizer);
  std::vector<std::string> texts;
  for (const auto& c : corpus.chunks) texts.push_back(c.augmented_text);
  const auto vectors = embed_texts(texts, embedder, embed);
  store.replace_summary_chunks(doc_id, corpus.chunks, vectors, corpus.records);

  report.summary_chunks = corpus.chunks.size();
  report.failed = corpus.failures.size();
  report.skipped = corpus.skipped;
  return report;
}

std::filesystem::path chunk_cache_path(const std::filesystem::path& dir, const std::string& model_id,
                                       ChunkKind kind) {
  const auto stem = model_file_stem(model_id);
  return dir / (kind == ChunkKind::kRaw ? stem + ".vecs" : stem + ".summary.vecs");
}

std::vector<CacheExport> export_chunk_caches(DocumentStore& store, const std::string& model_id,
                                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<CacheExport> out;
  for (const auto kind : {ChunkKind::kRaw, ChunkKind::kSummary}) {
    const auto matrix = store.embedding_matrix(kind, model_id);
    if (matrix.empty()) continue;
    const auto path = chunk_cache_path(dir, model_id, kind);
    out.push_back({path, matrix.rows(), save_matrix(matrix, path)});
  }
  return out;
}

}  // namespace scichat
