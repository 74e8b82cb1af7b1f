#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "scichat/common/csv.hpp"
#include "scichat/common/error.hpp"
#include "scichat/common/utf8.hpp"
#include "scichat/embedding/vector_cache.hpp"
#include "scichat/eval/classification.hpp"
#include "scichat/eval/judge.hpp"
#include "scichat/eval/ranking.hpp"
#include "scichat/images/image_search.hpp"
#include "scichat/projection/scatter.hpp"
#include "scichat/projection/tsne.hpp"
#include "scichat/retrieval/retrieval.hpp"
#include "scichat/service/config.hpp"
#include "scichat/service/pipeline.hpp"
#include "scichat/service/server.hpp"

namespace scichat {
namespace {

using nlohmann::json;

std::atomic<bool> g_stop_requested{false};

extern "C" void on_stop_signal(int) { g_stop_requested = true; }

std::string read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json(const std::filesystem::path& path, const json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

std::string fmt_percent(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(1);
  s << *v * 100.0;
  return s.str();
}

std::string opt_field(const std::optional<std::string>& v) { return v.value_or(""); }

// Options shared by every subcommand.
struct Globals {
  std::string config_path;
  std::string db;
  bool verbose = false;
};

std::unique_ptr<AppContext> open_context(const Globals& g) {
  auto config = load_config(g.config_path);
  if (!g.db.empty()) config.store_path = g.db;
  return AppContext::create(std::move(config));
}

SummarizerOptions summarizer_options(const AppContext& ctx) {
  SummarizerOptions o;
  o.instruction = ctx.config.summary_instruction;
  o.chunking = ctx.config.chunking;
  o.temperature = ctx.config.llm.temperature;
  o.workers = static_cast<std::size_t>(std::max(1, ctx.config.llm.max_concurrency));
  o.retry = make_retry_policy(ctx.config);
  return o;
}

void print_ingest(const IngestSummary& summary, std::ostream& out, std::ostream& err) {
  std::size_t chunks = 0;
  for (const auto& r : summary.documents) {
    chunks += r.counts.chunks;
    out << r.doc_id << "\t" << r.counts.chunks << " chunks\t" << r.source << (r.empty_body ? "\t(no body)" : "")
        << "\n";
  }
  for (const auto& f : summary.failures) err << "failed: " << f.source << ": " << f.message << "\n";
  out << "ingested " << summary.documents.size() << " documents, " << chunks << " chunks, "
      << summary.failures.size() << " failures\n";
}

void print_hits_header(std::ostream& out, SimilarityMeasure m) {
  out << "# measure " << to_string(m) << (higher_is_better(m) ? " (higher is closer)" : " (lower is closer)")
      << "\n";
}

void print_image_hits(const std::vector<ImageHit>& hits, SimilarityMeasure m, std::ostream& out) {
  print_hits_header(out, m);
  out << "rank\tscore\timage_id\tkind\tgroup\tpath\n";
  for (const auto& h : hits) {
    out << h.hit.rank << "\t" << h.hit.score << "\t" << h.record.image_id << "\t" << to_string(h.record.kind) << "\t"
        << opt_field(h.record.group_key) << "\t" << h.record.path << "\n";
  }
}

void print_answer(const ChatAnswer& a, std::ostream& out) {
  out << a.response_text << "\n\n";
  out << "sources:";
  for (const auto& p : a.provenance) out << " " << p.chunk_id;
  out << "\n";
  for (const auto& w : a.warnings) out << "warning: " << w << "\n";
}

struct ProjectionInput {
  std::vector<double> data;
  std::size_t dim = 0;
  std::vector<std::string> labels;
  std::vector<std::int64_t> row_ids;
};

void append_matrix(ProjectionInput& in, const EmbeddingMatrix& m, DocumentStore& store) {
  if (m.empty()) return;
  if (in.dim != 0 && in.dim != m.dim) throw Error(ErrorCode::kDimensionMismatch, "kinds disagree on dim");
  in.dim = m.dim;
  const auto chunks = store.fetch_chunks(m.row_ids);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    in.data.insert(in.data.end(), row.begin(), row.end());
    in.labels.push_back(chunks[i].chunk.doc_id);
    in.row_ids.push_back(m.row_ids[i]);
  }
}

std::vector<int> label_indices(const std::vector<std::string>& labels) {
  std::map<std::string, int> index;
  std::vector<int> out;
  for (const auto& l : labels) out.push_back(index.emplace(l, static_cast<int>(index.size())).first->second);
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"scichat: retrieval-augmented chat over a corpus of scientific papers"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--db", g.db, "SQLite database path (overrides [store] path)");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");

  std::function<void()> action;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse, chunk, embed and store papers");
  std::string tei_dir, pdf_dir, grobid_url;
  std::size_t chunk_size = 1400, overlap = 280;
  bool keep_tei = false;
  auto* tei_opt = ingest->add_option("--tei-dir", tei_dir, "Directory of TEI XML files")->check(CLI::ExistingDirectory);
  auto* pdf_opt = ingest->add_option("--pdf-dir", pdf_dir, "Directory of PDFs to convert")->check(CLI::ExistingDirectory);
  tei_opt->excludes(pdf_opt);
  ingest->add_option("--grobid-url", grobid_url, "PDF to TEI conversion server");
  ingest->add_option("--chunk-size", chunk_size, "Chunk length in characters")->capture_default_str();
  ingest->add_option("--overlap", overlap, "Characters shared by consecutive chunks")->capture_default_str();
  ingest->add_flag("--keep-tei", keep_tei, "Write converted TEI next to each PDF");
  ingest->callback([&] {
    if (tei_dir.empty() && pdf_dir.empty()) throw CLI::RequiredError("--tei-dir or --pdf-dir");
    action = [&] {
      auto config = load_config(g.config_path);
      if (!g.db.empty()) config.store_path = g.db;
      if (!grobid_url.empty()) config.grobid_url = grobid_url;
      config.chunking = {chunk_size, overlap};
      config.chunking.validate();
      auto ctx = AppContext::create(std::move(config));
      IngestOptions o{ctx->config.chunking, ctx->embed_options()};
      const auto summary = tei_dir.empty()
                               ? ingest_pdf_directory(pdf_dir, *ctx->converter, *ctx->store, *ctx->embedder, o, keep_tei)
                               : ingest_tei_directory(tei_dir, *ctx->store, *ctx->embedder, o);
      print_ingest(summary, out, err);
    };
  });

  // summarize
  auto* summarize = app.add_subcommand("summarize", "Build the summary corpus of stored papers");
  std::vector<std::string> summarize_docs;
  bool summarize_all = false;
  auto* doc_opt = summarize->add_option("--doc", summarize_docs, "Document id (repeatable)");
  summarize->add_flag("--all", summarize_all, "Every stored document")->excludes(doc_opt);
  summarize->callback([&] {
    if (summarize_docs.empty() && !summarize_all) throw CLI::RequiredError("--doc or --all");
    action = [&] {
      auto ctx = open_context(g);
      if (summarize_all) {
        for (const auto& d : ctx->store->list_documents()) summarize_docs.push_back(d.doc_id);
      }
      std::size_t raw = 0, summary = 0, failed = 0;
      for (const auto& id : summarize_docs) {
        const auto r = summarize_document(id, *ctx->store, *ctx->llm, *ctx->embedder, summarizer_options(*ctx),
                                          ctx->embed_options());
        raw += r.raw_chunks;
        summary += r.summary_chunks;
        failed += r.failed;
        out << id << "\t" << r.raw_chunks << " raw\t" << r.summary_chunks << " summary\t" << r.failed
            << " failed\n";
      }
      out << "raw chunks " << raw << ", summary chunks " << summary << ", compression ratio "
          << compression_ratio(summary, raw) << ", failed " << failed << "\n";
    };
  });

  // embed-cache
  auto* cache = app.add_subcommand("embed-cache", "Export or inspect binary vector caches");
  std::string cache_out, cache_inspect;
  auto* cache_out_opt = cache->add_option("--out", cache_out, "Directory for <model>.vecs files");
  cache->add_option("--inspect", cache_inspect, "Print the header of a .vecs file")
      ->check(CLI::ExistingFile)
      ->excludes(cache_out_opt);
  cache->callback([&] {
    action = [&] {
      if (!cache_inspect.empty()) {
        const auto block = read_vector_block(cache_inspect);
        out << "model " << block.header.model_id << "\ndim " << block.header.dim << "\ncount " << block.header.count
            << "\n";
        return;
      }
      auto ctx = open_context(g);
      const auto dir = cache_out.empty() ? ctx->config.cache_dir : std::filesystem::path(cache_out);
      for (const auto& e : export_chunk_caches(*ctx->store, ctx->embedder->model_id(), dir)) {
        out << e.path.string() << "\t" << e.rows << " rows\t" << e.bytes << " bytes\n";
      }
    };
  });

  // search
  auto* search = app.add_subcommand("search", "Nearest chunks to a text, or nearest images to an image");
  std::string search_text, search_image, search_measure, search_exclude, search_kind = "raw";
  std::size_t search_k = 10;
  auto* text_opt = search->add_option("--text", search_text, "Query text");
  auto* image_opt = search->add_option("--image", search_image, "Query image file")->check(CLI::ExistingFile);
  text_opt->excludes(image_opt);
  search->add_option("-k", search_k, "Number of hits")->check(CLI::Range(1, 100000));
  search->add_option("--measure", search_measure, "cosine | euclidean | dot");
  search->add_option("--exclude-group", search_exclude, "Image search: drop images of this group");
  search->add_option("--kind", search_kind, "Text search: raw | summary")->check(CLI::IsMember({"raw", "summary"}));
  search->callback([&] {
    if (search_text.empty() && search_image.empty()) throw CLI::RequiredError("--text or --image");
    action = [&] {
      auto ctx = open_context(g);
      if (!search_text.empty()) {
        const auto measure = search_measure.empty() ? SimilarityMeasure::kCosine : parse_measure(search_measure);
        const auto matrix = ctx->matrices->chunks(parse_chunk_kind(search_kind), ctx->embedder->model_id());
        const auto query = embed_text(search_text, *ctx->embedder, ctx->embed_options());
        const auto hits = top_k(query, *matrix, search_k, measure);
        std::vector<ChunkId> ids;
        for (const auto& h : hits) ids.push_back(h.row_id);
        const auto chunks = ctx->store->fetch_chunks(ids);
        print_hits_header(out, measure);
        out << "rank\tscore\tchunk_id\tdoc\tpreview\n";
        for (std::size_t i = 0; i < hits.size(); ++i) {
          out << hits[i].rank << "\t" << hits[i].score << "\t" << hits[i].row_id << "\t" << chunks[i].display_name
              << "\t" << utf8::collapse_whitespace(utf8::prefix(chunks[i].chunk.raw_text, 80)) << "\n";
        }
        return;
      }
      ImageSearchOptions o;
      o.measure = search_measure.empty() ? SimilarityMeasure::kEuclidean : parse_measure(search_measure);
      o.k = search_k;
      if (!search_exclude.empty()) o.exclude_group = search_exclude;
      const ImageInput input{std::filesystem::path(search_image).filename().string(), read_binary(search_image)};
      print_image_hits(ctx->images->by_image(input, *ctx->image_embedder, o, make_retry_policy(ctx->config)),
                       o.measure, out);
    };
  });

  // images
  auto* images = app.add_subcommand("images", "Image corpus");
  images->require_subcommand(1);
  auto* images_ingest = images->add_subcommand("ingest", "Embed and store the images of a manifest");
  std::string manifest;
  images_ingest->add_option("--manifest", manifest, "CSV path,kind,doc_id,figure_label,group_key,caption")
      ->required()
      ->check(CLI::ExistingFile);
  images_ingest->callback([&] {
    action = [&] {
      auto ctx = open_context(g);
      const auto entries = read_manifest(manifest);
      ImageIngestOptions o;
      o.retry = make_retry_policy(ctx->config);
      const auto counts = ingest_images(entries, *ctx->image_embedder, *ctx->store, o);
      for (const auto& [path, message] : counts.errors) err << "failed: " << path << ": " << message << "\n";
      out << "stored " << counts.ok << " images, " << counts.failed << " failed\n";
    };
  });
  auto* images_search = images->add_subcommand("search", "Nearest stored images");
  std::string image_query, image_measure = "euclidean", image_exclude;
  std::optional<ImageId> image_id;
  std::size_t image_k = 5;
  bool exclude_same_group = false;
  auto* query_opt = images_search->add_option("--query", image_query, "Image file")->check(CLI::ExistingFile);
  images_search->add_option("--id", image_id, "Stored image id")->excludes(query_opt);
  images_search->add_option("--measure", image_measure, "cosine | euclidean | dot")->capture_default_str();
  images_search->add_option("-k", image_k, "Number of hits")->check(CLI::Range(1, 100000));
  images_search->add_option("--exclude-group", image_exclude, "Drop images of this group");
  images_search->add_flag("--exclude-same-group", exclude_same_group, "Drop images sharing the query's group");
  images_search->callback([&] {
    if (image_query.empty() && !image_id) throw CLI::RequiredError("--query or --id");
    action = [&] {
      auto ctx = open_context(g);
      ImageSearchOptions o;
      o.measure = parse_measure(image_measure);
      o.k = image_k;
      if (!image_exclude.empty()) o.exclude_group = image_exclude;
      std::optional<ImageId> id = image_id;
      if (!id) {
        // A query file that is itself stored is searched by id, so it is excluded from its own hits.
        const auto canonical = std::filesystem::weakly_canonical(image_query).string();
        if (const auto stored = ctx->store->find_image_by_path(canonical)) id = stored->image_id;
      }
      if (id) {
        print_image_hits(ctx->images->by_id(*id, o, exclude_same_group), o.measure, out);
        return;
      }
      if (exclude_same_group) {
        o.exclude_group = default_group_key(image_query);
      }
      const ImageInput input{std::filesystem::path(image_query).filename().string(), read_binary(image_query)};
      print_image_hits(ctx->images->by_image(input, *ctx->image_embedder, o, make_retry_policy(ctx->config)),
                       o.measure, out);
    };
  });

  // chat / ask
  std::string mode_text, ask_query;
  std::optional<double> temperature;
  std::optional<std::size_t> k_cap;
  bool as_json = false;
  const auto query_options = [&](const AppContext& ctx) {
    QueryOptions o;
    o.k_cap = k_cap.value_or(ctx.config.k_cap);
    o.mode = mode_text.empty() ? ctx.config.mode : parse_corpus_mode(mode_text);
    o.temperature = temperature.value_or(ctx.config.llm.temperature);
    return o;
  };
  auto* chat = app.add_subcommand("chat", "Interactive conversation with the corpus");
  auto* ask = app.add_subcommand("ask", "Answer one query and print the cited chunk ids");
  for (auto* sub : {chat, ask}) {
    sub->add_option("--mode", mode_text, "raw | summary | both")->check(CLI::IsMember({"raw", "summary", "both"}));
    sub->add_option("--temperature", temperature, "Sampling temperature")->check(CLI::Range(0.0, 2.0));
    sub->add_option("-k,--k-cap", k_cap, "Retrieved chunks per corpus")->check(CLI::Range(1, 1000));
  }
  ask->add_option("--query,-q", ask_query, "Question")->required();
  ask->add_flag("--json", as_json, "Print the full answer as JSON");
  ask->callback([&] {
    action = [&] {
      auto ctx = open_context(g);
      const auto answer = ctx->engine->answer_query(ask_query, query_options(*ctx));
      if (as_json) {
        out << to_json(answer).dump(2) << "\n";
      } else {
        print_answer(answer, out);
      }
    };
  });
  chat->callback([&] {
    action = [&] {
      auto ctx = open_context(g);
      auto o = query_options(*ctx);
      o.session_id = ctx->engine->sessions().create();
      std::string line;
      out << "> " << std::flush;
      while (std::getline(std::cin, line)) {
        if (line == "/quit" || line == "/exit") break;
        if (!utf8::is_blank(line)) {
          try {
            const auto answer =
                ctx->engine->answer_query(line, o, [&](std::string_view delta) { out << delta << std::flush; });
            out << "\n\nsources:";
            for (const auto& p : answer.provenance) out << " " << p.chunk_id;
            out << "\n";
          } catch (const Error& e) {
            err << "error: " << e.what() << "\n";
          }
        }
        out << "> " << std::flush;
      }
    };
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Ranking and classification studies");
  eval->require_subcommand(1);
  auto* rank = eval->add_subcommand("rank", "Pairwise impact judgments and the misordered-pair sort");
  std::size_t n_pairs = 818;
  std::uint64_t rank_seed = 0;
  std::string judge_kind = "stub", rank_csv = "ranking.csv", rank_report = "ranking.json", impact_csv;
  rank->add_option("--pairs", n_pairs, "Number of document pairs")->capture_default_str();
  rank->add_option("--seed", rank_seed, "Seed for pairing and sorting");
  rank->add_option("--judge", judge_kind, "stub | llm")->check(CLI::IsMember({"stub", "llm"}))->capture_default_str();
  rank->add_option("--csv", rank_csv, "Ordering output")->capture_default_str();
  rank->add_option("--report", rank_report, "JSON report output")->capture_default_str();
  rank->add_option("--impact", impact_csv, "CSV doc_id,impact to correlate with the ordering")
      ->check(CLI::ExistingFile);
  rank->callback([&] {
    action = [&] {
      auto ctx = open_context(g);
      const auto docs = ctx->store->list_documents();
      std::vector<std::string> ids;
      std::map<std::string, std::string> texts;
      JudgeOptions jo;
      jo.budget = ctx->config.budget;
      jo.temperature = ctx->config.llm.temperature;
      jo.retry = make_retry_policy(ctx->config);
      for (const auto& d : docs) {
        ids.push_back(d.doc_id);
        texts[d.doc_id] = judge_text(d, jo.side_chars());
      }
      const auto pairs = sample_pairs(ids, n_pairs, rank_seed);
      LengthJudge oracle;
      LlmJudge llm_judge(*ctx->llm, jo);
      PairJudge& judge = judge_kind == "llm" ? static_cast<PairJudge&>(llm_judge) : oracle;
      const auto run = run_comparisons(pairs, texts, judge,
                                       static_cast<std::size_t>(std::max(1, ctx->config.llm.max_concurrency)));
      ctx->store->add_comparisons(run.records);
      SortOptions so;
      so.seed = rank_seed;
      const auto state = sort_by_comparisons(run.records, ids, so);
      const auto cycles = find_cycles(run.records);

      std::ofstream csv_out(rank_csv);
      if (!csv_out) throw Error(ErrorCode::kIo, "cannot write " + rank_csv);
      csv::write_row(csv_out, {"position", "doc_id", "display_name"});
      std::map<std::string, std::string> names;
      for (const auto& d : docs) names[d.doc_id] = d.display_name;
      for (std::size_t i = 0; i < state.ordering.size(); ++i) {
        csv::write_row(csv_out, {std::to_string(i), state.ordering[i], names[state.ordering[i]]});
      }

      json report = {{"seed", rank_seed},
                     {"judge", judge_kind},
                     {"documents", ids.size()},
                     {"pairs", pairs.size()},
                     {"judged", run.records.size()},
                     {"judge_failures", run.failures.size()},
                     {"initial_misordered", state.initial_misordered},
                     {"misordered", state.misordered_count},
                     {"misordered_fraction", state.misordered_fraction()},
                     {"passes", state.passes},
                     {"strict_swaps", state.strict_swaps},
                     {"plateau_swaps", state.plateau_swaps},
                     {"cycles", cycles}};
      if (!impact_csv.empty()) {
        const auto fit = impact_correlation(state.ordering, read_impact_csv(impact_csv));
        report["impact"] = {{"n", fit.n},
                            {"slope", fit.slope},
                            {"intercept", fit.intercept},
                            {"r", fit.r ? json(*fit.r) : json(nullptr)},
                            {"r_squared", fit.r_squared ? json(*fit.r_squared) : json(nullptr)}};
      }
      write_json(rank_report, report);
      out << "judged " << run.records.size() << " of " << pairs.size() << " pairs; misordered "
          << state.misordered_count << " (" << fmt_percent(state.misordered_fraction()) << "%), "
          << cycles.size() << " cycles\n";
    };
  });

  auto* classify = eval->add_subcommand("classify", "Topic classification against a ground truth");
  std::string categories_file, truth_file, confusion_file, metrics_csv = "classification.csv",
                                                          classify_report = "classification.json";
  auto* categories_opt =
      classify->add_option("--categories", categories_file, "One category per line")->check(CLI::ExistingFile);
  auto* truth_opt = classify->add_option("--truth", truth_file, "CSV doc_id,label")->check(CLI::ExistingFile);
  classify->add_option("--confusion", confusion_file, "Score a saved confusion matrix instead of classifying")
      ->check(CLI::ExistingFile)
      ->excludes(categories_opt)
      ->excludes(truth_opt);
  classify->add_option("--csv", metrics_csv, "Per-category metrics output")->capture_default_str();
  classify->add_option("--report", classify_report, "JSON report output")->capture_default_str();
  classify->callback([&] {
    if (confusion_file.empty() && (categories_file.empty() || truth_file.empty())) {
      throw CLI::RequiredError("--categories and --truth (or --confusion)");
    }
    action = [&] {
      ConfusionMatrix matrix;
      json report;
      if (!confusion_file.empty()) {
        // Header: truth,<cat1>,<cat2>,...; one row per true category.
        const auto rows = csv::read_file(confusion_file);
        if (rows.empty() || rows.front().size() < 2) throw Error(ErrorCode::kFormat, "empty confusion matrix");
        matrix.categories.assign(rows.front().begin() + 1, rows.front().end());
        for (std::size_t r = 1; r < rows.size(); ++r) {
          if (rows[r].size() != matrix.categories.size() + 1) {
            throw Error(ErrorCode::kFormat, "confusion row " + std::to_string(r) + " has the wrong width");
          }
          std::vector<std::size_t> counts;
          for (std::size_t c = 1; c < rows[r].size(); ++c) counts.push_back(std::stoul(rows[r][c]));
          matrix.counts.push_back(std::move(counts));
        }
        matrix.validate();
      } else {
        auto ctx = open_context(g);
        const auto categories = read_categories(categories_file);
        const auto truth = read_truth_csv(truth_file);
        std::vector<DocumentRecord> docs;
        for (const auto& d : ctx->store->list_documents()) {
          if (truth.count(d.doc_id)) docs.push_back(d);
        }
        ClassifyOptions co;
        co.temperature = ctx->config.llm.temperature;
        co.retry = make_retry_policy(ctx->config);
        co.workers = static_cast<std::size_t>(std::max(1, ctx->config.llm.max_concurrency));
        const auto records = classify_documents(docs, categories, *ctx->llm, co);
        ctx->store->put_classifications(records);
        auto t = tally(categories, truth, records);
        matrix = std::move(t.matrix);
        report["abstentions"] = t.abstentions;
        report["unlabeled"] = t.unlabeled;
      }
      std::ofstream csv_out(metrics_csv);
      if (!csv_out) throw Error(ErrorCode::kIo, "cannot write " + metrics_csv);
      csv::write_row(csv_out, {"category", "tp", "fp", "fn", "tn", "precision", "recall", "accuracy"});
      json metrics = json::array();
      const auto num = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
      out << "category\tPr\tRe\tAc\n";
      for (const auto& m : all_metrics(matrix)) {
        const auto cell = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string(); };
        csv::write_row(csv_out, {m.category, std::to_string(m.tp), std::to_string(m.fp), std::to_string(m.fn),
                                 std::to_string(m.tn), cell(m.precision), cell(m.recall), cell(m.accuracy)});
        metrics.push_back({{"category", m.category},
                           {"tp", m.tp},
                           {"fp", m.fp},
                           {"fn", m.fn},
                           {"tn", m.tn},
                           {"precision", num(m.precision)},
                           {"recall", num(m.recall)},
                           {"accuracy", num(m.accuracy)}});
        out << m.category << "\t" << fmt_percent(m.precision) << "\t" << fmt_percent(m.recall) << "\t"
            << fmt_percent(m.accuracy) << "\n";
      }
      report["categories"] = matrix.categories;
      report["confusion"] = matrix.counts;
      report["classified"] = matrix.total();
      report["metrics"] = metrics;
      write_json(classify_report, report);
    };
  });

  // project
  auto* project = app.add_subcommand("project", "t-SNE map of chunk embeddings");
  std::string project_kind = "raw", project_out = "scatter.svg", project_csv, displacement;
  TsneOptions tsne;
  std::size_t highlight_count = 20;
  project->add_option("--kind", project_kind, "raw | summary | both")
      ->check(CLI::IsMember({"raw", "summary", "both"}))
      ->capture_default_str();
  project->add_option("--perplexity", tsne.perplexity, "Target perplexity")->capture_default_str();
  project->add_option("--iters", tsne.iterations, "Gradient descent iterations")->capture_default_str();
  project->add_option("--seed", tsne.seed, "Seed for initialisation and highlighting");
  project->add_option("--out", project_out, "SVG output")->capture_default_str();
  project->add_option("--csv", project_csv, "CSV of coordinates");
  project->add_option("--highlight", highlight_count, "Documents drawn in colour")->capture_default_str();
  project->add_option("--displacement", displacement, "raw-vs-augmented: chunk text with and without the name")
      ->check(CLI::IsMember({"raw-vs-augmented"}));
  project->callback([&] {
    action = [&] {
      auto ctx = open_context(g);
      const auto model = ctx->embedder->model_id();
      ProjectionInput in;
      if (project_kind != "summary") append_matrix(in, *ctx->matrices->chunks(ChunkKind::kRaw, model), *ctx->store);
      if (displacement.empty() && project_kind != "raw") {
        append_matrix(in, *ctx->matrices->chunks(ChunkKind::kSummary, model), *ctx->store);
      }
      const std::size_t n = in.labels.size();
      if (n == 0) throw Error(ErrorCode::kNotFound, "no embedded chunks to project");
      ScatterOptions so;
      so.highlight = choose_highlight(in.labels, highlight_count, tsne.seed);

      if (displacement.empty()) {
        const auto result = tsne_project(in.data, n, in.dim, tsne);
        if (result.low_n_warning) err << "warning: fewer than 3 x perplexity points\n";
        so.title = project_kind + " chunks";
        write_text_file(project_out, render_scatter_svg(result.coords, in.labels, so));
        if (!project_csv.empty()) write_text_file(project_csv, render_scatter_csv(result.coords, in.labels, in.row_ids));
        out << "projected " << n << " chunks to " << project_out << "\n";
        return;
      }
      // The stored vectors embed the name-prepended text; embed the bare text
      // too and project both sets jointly so positions are comparable.
      const auto chunks = ctx->store->fetch_chunks(in.row_ids);
      std::vector<std::string> raw_texts;
      for (const auto& c : chunks) raw_texts.push_back(c.chunk.raw_text);
      const auto bare = embed_texts(raw_texts, *ctx->embedder, ctx->embed_options());
      std::vector<double> joint;
      joint.reserve(2 * n * in.dim);
      for (const auto& v : bare) joint.insert(joint.end(), v.values.begin(), v.values.end());
      joint.insert(joint.end(), in.data.begin(), in.data.end());
      const auto result = tsne_project(joint, 2 * n, in.dim, tsne);
      const std::span<const double> coords(result.coords);
      so.title = "raw to name-prepended";
      write_text_file(project_out,
                      render_displacement_svg(coords.subspan(0, 2 * n), coords.subspan(2 * n), in.labels, so));
      if (!project_csv.empty()) {
        std::vector<std::string> labels;
        std::vector<std::int64_t> ids;
        for (int pass = 0; pass < 2; ++pass) {
          labels.insert(labels.end(), in.labels.begin(), in.labels.end());
          ids.insert(ids.end(), in.row_ids.begin(), in.row_ids.end());
        }
        write_text_file(project_csv, render_scatter_csv(result.coords, labels, ids));
      }
      const auto label_ids = label_indices(in.labels);
      std::vector<double> bare_data(joint.begin(), joint.begin() + static_cast<std::ptrdiff_t>(n * in.dim));
      out << "nearest-centroid agreement: raw " << centroid_agreement(bare_data, in.dim, label_ids)
          << ", name-prepended " << centroid_agreement(in.data, in.dim, label_ids) << "\n";
      out << "projected " << n << " chunk pairs to " << project_out << "\n";
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP API and static chat UI");
  std::string serve_addr, static_dir;
  serve->add_option("--addr", serve_addr, "host:port (overrides [server] addr)");
  serve->add_option("--static-dir", static_dir, "Directory served at /");
  serve->callback([&] {
    action = [&] {
      auto config = load_config(g.config_path);
      if (!g.db.empty()) config.store_path = g.db;
      if (!serve_addr.empty()) config.server_addr = serve_addr;
      if (!static_dir.empty()) config.static_dir = static_dir;
      const auto [host, port] = parse_addr(config.server_addr);
      auto ctx = AppContext::create(std::move(config));
      Server server(*ctx);
      g_stop_requested = false;
      std::signal(SIGINT, on_stop_signal);
      std::signal(SIGTERM, on_stop_signal);
      std::jthread watcher([&server](std::stop_token st) {
        while (!st.stop_requested() && !g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
      });
      spdlog::info("listening on {}:{}", host, port);
      if (!server.listen(host, port)) throw Error(ErrorCode::kIo, "cannot listen on " + ctx->config.server_addr);
      spdlog::info("stopped");
    };
  });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::warn);
  try {
    if (action) action();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace scichat
