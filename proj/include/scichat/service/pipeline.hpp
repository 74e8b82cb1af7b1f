#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scichat/corpus/chunker.hpp"
#include "scichat/corpus/pdf_converter.hpp"
#include "scichat/embedding/text_embedder.hpp"
#include "scichat/llm/chat_provider.hpp"
#include "scichat/store/document_store.hpp"
#include "scichat/summarizer/summarizer.hpp"

namespace scichat {

struct IngestOptions {
  ChunkingParams chunking;
  EmbedOptions embed;
};

struct IngestReport {
  std::string doc_id;
  std::string source;
  UpsertCounts counts;
  bool empty_body = false;  // recorded without chunks
};

struct IngestFailure {
  std::string source;
  std::string message;
};

struct IngestSummary {
  std::vector<IngestReport> documents;
  std::vector<IngestFailure> failures;
};

// Parse -> chunk -> embed (augmented text) -> store. A TEI without a body is
// stored with zero chunks. Parse errors propagate.
IngestReport ingest_tei(std::string_view xml, const std::string& source_path, DocumentStore& store,
                        TextEmbedder& embedder, const IngestOptions& options = {});

// Every *.xml file in `dir`, in name order. Per-file errors are collected.
IngestSummary ingest_tei_directory(const std::filesystem::path& dir, DocumentStore& store,
                                   TextEmbedder& embedder, const IngestOptions& options = {});

// Every *.pdf file in `dir`, converted to TEI first. The TEI is written next
// to the PDF as <stem>.tei.xml when keep_tei is set.
IngestSummary ingest_pdf_directory(const std::filesystem::path& dir, PdfConverter& converter,
                                   DocumentStore& store, TextEmbedder& embedder,
                                   const IngestOptions& options = {}, bool keep_tei = false);

struct SummaryReport {
  std::string doc_id;
  std::size_t raw_chunks = 0;
  std::size_t summary_chunks = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
};

// Builds, embeds and stores the summary corpus of one stored document.
SummaryReport summarize_document(const std::string& doc_id, DocumentStore& store, ChatProvider& llm,
                                 TextEmbedder& embedder, const SummarizerOptions& summarizer = {},
                                 const EmbedOptions& embed = {});

struct CacheExport {
  std::filesystem::path path;
  std::size_t rows = 0;
  std::size_t bytes = 0;
};

// <dir>/<model stem>.vecs (raw) and <dir>/<model stem>.summary.vecs, each with
// an .ids sidecar. Kinds without vectors are skipped.
std::vector<CacheExport> export_chunk_caches(DocumentStore& store, const std::string& model_id,
                                             const std::filesystem::path& dir);

std::filesystem::path chunk_cache_path(const std::filesystem::path& dir, const std::string& model_id,
                                       ChunkKind kind);

}  // namespace scichat
