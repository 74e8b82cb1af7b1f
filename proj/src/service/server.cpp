#include "scichat/service/server.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "scichat/common/error.hpp"
#include "scichat/common/utf8.hpp"
#include "scichat/kernels/measure.hpp"
#include "scichat/retrieval/retrieval.hpp"

namespace scichat {
namespace {

using nlohmann::json;

constexpr std::size_t kPreviewScalars = 240;
constexpr std::size_t kMaxK = 1000;

struct HttpError : std::runtime_error {
  HttpError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status(status), code(std::move(code)) {}
  int status;
  std::string code;
};

[[noreturn]] void bad_request(const std::string& message) { throw HttpError(400, "invalid_argument", message); }

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) bad_request("request body must be a JSON object");
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) bad_request("request body must be a JSON object");
  return body;
}

std::string required_string(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) bad_request(std::string("'") + key + "' must be a string");
  const auto value = it->get<std::string>();
  if (utf8::is_blank(value)) bad_request(std::string("'") + key + "' must not be empty");
  return value;
}

std::size_t read_k(const json& body, std::size_t fallback) {
  const auto it = body.find("k");
  if (it == body.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 1 || it->get<long long>() > static_cast<long long>(kMaxK)) {
    bad_request("'k' must be an integer in [1, " + std::to_string(kMaxK) + "]");
  }
  return it->get<std::size_t>();
}

std::size_t parse_k_field(const std::string& text, std::size_t fallback) {
  if (text.empty()) return fallback;
  json number = json::parse(text, nullptr, false);
  if (!number.is_number_integer()) bad_request("'k' must be an integer");
  json wrapper = {{"k", number}};
  return read_k(wrapper, fallback);
}

SimilarityMeasure read_measure(const std::string& text) {
  try {
    return parse_measure(text);
  } catch (const Error& e) {
    bad_request(e.what());
  }
}

QueryOptions chat_options(const json& body, const AppConfig& config) {
  QueryOptions options;
  options.k_cap = read_k(body, config.k_cap);
  options.mode = config.mode;
  options.temperature = config.llm.temperature;
  if (const auto it = body.find("mode"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) bad_request("'mode' must be a string");
    try {
      options.mode = parse_corpus_mode(it->get<std::string>());
    } catch (const Error& e) {
      bad_request(e.what());
    }
  }
  if (const auto it = body.find("temperature"); it != body.end() && !it->is_null()) {
    if (!it->is_number()) bad_request("'temperature' must be a number");
    options.temperature = it->get<double>();
    if (options.temperature < kMinTemperature || options.temperature > kMaxTemperature) {
      bad_request("'temperature' must be in [0, 2]");
    }
  }
  if (const auto it = body.find("session_id"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) bad_request("'session_id' must be a string");
    options.session_id = it->get<std::string>();
  }
  return options;
}

bool corpus_empty(AppContext& ctx, CorpusMode mode) {
  const auto model = ctx.embedder->model_id();
  const bool raw_empty = ctx.matrices->chunks(ChunkKind::kRaw, model)->empty();
  const bool summary_empty = ctx.matrices->chunks(ChunkKind::kSummary, model)->empty();
  switch (mode) {
    case CorpusMode::kRaw: return raw_empty;
    case CorpusMode::kSummary: return summary_empty;
    case CorpusMode::kBoth: return raw_empty && summary_empty;
  }
  return true;
}

[[noreturn]] void corpus_unavailable(const std::string& what) {
  throw HttpError(503, "corpus_empty", what);
}

std::string sse_event(const std::string& event, const json& data) {
  return "event: " + event + "\ndata: " + data.dump() + "\n\n";
}

std::string content_type_for(const std::string& bytes) {
  const auto mime = mime_type(detect_image_format(bytes));
  return mime.empty() ? std::string("application/octet-stream") : std::string(mime);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json image_hits_json(const std::vector<ImageHit>& hits) {
  json out = json::array();
  for (const auto& h : hits) {
    auto entry = to_json(h.record);
    entry["rank"] = h.hit.rank;
    entry["score"] = h.hit.score;
    entry["thumbnail_url"] = "/api/images/" + std::to_string(h.record.image_id) + "/file";
    out.push_back(std::move(entry));
  }
  return out;
}

std::string_view error_code_name(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return to_string(err->code());
  return "internal";
}

}  // namespace

int http_status(const std::exception& error) {
  if (const auto* http = dynamic_cast<const HttpError*>(&error)) return http->status;
  const auto* err = dynamic_cast<const Error*>(&error);
  if (!err) return 500;
  switch (err->code()) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kEmptyDocument:
    case ErrorCode::kFormat:
    case ErrorCode::kLength:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kDomain:
    case ErrorCode::kBudget:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kProviderPermanent:
    case ErrorCode::kProviderTransient:
    case ErrorCode::kJudgment:
      return 502;
    default:
      return 500;
  }
}

json error_body(std::string code, std::string message, json detail) {
  return {{"code", std::move(code)}, {"message", std::move(message)}, {"detail", std::move(detail)}};
}

json to_json(const ChatAnswer& answer) {
  json provenance = json::array();
  for (const auto& p : answer.provenance) provenance.push_back({{"chunk_id", p.chunk_id}, {"score", p.score}});
  json out = {
      {"response_text", answer.response_text},
      {"provenance", provenance},
      {"prompt_char_count", answer.prompt_char_count},
      {"prompt_est_tokens", answer.prompt_est_tokens},
      {"latency_ms",
       {{"retrieval", answer.latency.retrieval_ms},
        {"assembly", answer.latency.assembly_ms},
        {"completion", answer.latency.completion_ms}}},
      {"model_id", answer.model_id},
      {"temperature", answer.temperature},
      {"mode", to_string(answer.mode)},
      {"empty_corpus", answer.empty_corpus},
      {"warnings", answer.warnings},
  };
  out["session_id"] = answer.session_id ? json(*answer.session_id) : json(nullptr);
  return out;
}

json to_json(const StoredChunk& stored) {
  const auto& c = stored.chunk;
  return {{"chunk_id", c.chunk_id},         {"doc_id", c.doc_id},
          {"kind", to_string(c.kind)},      {"ordinal", c.ordinal},
          {"char_start", c.char_start},     {"char_end", c.char_end},
          {"raw_text", c.raw_text},         {"augmented_text", c.augmented_text},
          {"title", stored.title},          {"display_name", stored.display_name}};
}

json to_json(const ImageRecord& r) {
  const auto opt = [](const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); };
  return {{"image_id", r.image_id},     {"kind", to_string(r.kind)},    {"doc_id", opt(r.doc_id)},
          {"figure_label", opt(r.figure_label)}, {"group_key", opt(r.group_key)}, {"caption", opt(r.caption)},
          {"path", r.path}};
}

json to_json(const IngestReport& r) {
  return {{"doc_id", r.doc_id},
          {"source", r.source},
          {"chunks", r.counts.chunks},
          {"vectors", r.counts.vectors},
          {"figures", r.counts.figures},
          {"empty_body", r.empty_body}};
}

Server::Server(AppContext& context) : ctx_(context), http_(std::make_unique<httplib::Server>()) { routes(); }

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }

int Server::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::stop() {
  if (http_) http_->stop();
}

bool Server::running() const { return http_->is_running(); }

void Server::routes() {
  auto& s = *http_;
  AppContext& ctx = ctx_;

  s.set_exception_handler([](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const HttpError& e) {
      send_json(res, e.status, error_body(e.code, e.what()));
    } catch (const ProviderError& e) {
      json detail = {{"provider_status", e.status()}};
      send_json(res, 502, error_body(std::string(to_string(e.code())), e.what(), detail));
    } catch (const std::exception& e) {
      const int status = http_status(e);
      if (status >= 500) spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_json(res, status, error_body(std::string(error_code_name(e)), e.what()));
    } catch (...) {
      send_json(res, 500, error_body("internal", "unknown error"));
    }
  });

  s.Get("/api/health", [&ctx](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"status", "ok"},
               {"documents", ctx.store->document_count()},
               {"chunks", {{"raw", ctx.store->chunk_count(ChunkKind::kRaw)},
                           {"summary", ctx.store->chunk_count(ChunkKind::kSummary)}}},
               {"images", ctx.store->image_count()},
               {"embedding_model", ctx.embedder->model_id()},
               {"llm_model", ctx.llm->model_id()}});
  });

  s.Post("/api/chat", [&ctx](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto query = required_string(body, "query");
    const auto options = chat_options(body, ctx.config);
    bool stream = false;
    if (const auto it = body.find("stream"); it != body.end() && !it->is_null()) {
      if (!it->is_boolean()) bad_request("'stream' must be a boolean");
      stream = it->get<bool>();
    }
    if (corpus_empty(ctx, options.mode)) corpus_unavailable("no embedded chunks for mode " + std::string(to_string(options.mode)));

    if (!stream) {
      send_json(res, 200, to_json(ctx.engine->answer_query(query, options)));
      return;
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [&ctx, query, options](std::size_t, httplib::DataSink& sink) {
          const auto write = [&sink](const std::string& event) { sink.write(event.data(), event.size()); };
          try {
            const auto answer = ctx.engine->answer_query(
                query, options, [&](std::string_view delta) { write(sse_event("delta", {{"text", delta}})); });
            write(sse_event("answer", to_json(answer)));
          } catch (const std::exception& e) {
            write(sse_event("error", error_body(std::string(error_code_name(e)), e.what(), {{"status", http_status(e)}})));
          }
          sink.done();
          return true;
        });
  });

  s.Post("/api/search/text", [&ctx](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto query = required_string(body, "query");
    const auto k = read_k(body, ctx.config.k_cap);
    auto measure = SimilarityMeasure::kCosine;
    if (const auto it = body.find("measure"); it != body.end() && !it->is_null()) {
      if (!it->is_string()) bad_request("'measure' must be a string");
      measure = read_measure(it->get<std::string>());
    }
    auto kind = ChunkKind::kRaw;
    if (const auto it = body.find("kind"); it != body.end() && !it->is_null()) {
      if (!it->is_string()) bad_request("'kind' must be a string");
      try {
        kind = parse_chunk_kind(it->get<std::string>());
      } catch (const Error& e) {
        bad_request(e.what());
      }
    }
    const auto matrix = ctx.matrices->chunks(kind, ctx.embedder->model_id());
    if (matrix->empty()) corpus_unavailable("no embedded " + std::string(to_string(kind)) + " chunks");
    const auto vector = embed_text(query, *ctx.embedder, ctx.embed_options());
    const auto hits = top_k(vector, *matrix, k, measure);
    std::vector<ChunkId> ids;
    for (const auto& h : hits) ids.push_back(h.row_id);
    const auto chunks = ctx.store->fetch_chunks(ids);
    json out = json::array();
    for (std::size_t i = 0; i < hits.size(); ++i) {
      const auto& c = chunks[i];
      out.push_back({{"chunk_id", hits[i].row_id},
                     {"rank", hits[i].rank},
                     {"score", hits[i].score},
                     {"doc_id", c.chunk.doc_id},
                     {"display_name", c.display_name},
                     {"title", c.title},
                     {"kind", to_string(c.chunk.kind)},
                     {"preview", std::string(utf8::prefix(c.chunk.raw_text, kPreviewScalars))}});
    }
    send_json(res, 200, {{"measure", to_string(measure)}, {"hits", out}});
  });

  s.Post("/api/search/image", [&ctx](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) bad_request("expected multipart/form-data with an 'image' file");
    if (!req.has_file("image")) bad_request("missing 'image' part");
    const auto image = req.get_file_value("image");
    if (image.content.empty()) bad_request("'image' is empty");
    ImageSearchOptions options;
    if (req.has_file("measure")) options.measure = read_measure(req.get_file_value("measure").content);
    if (req.has_file("k")) options.k = parse_k_field(req.get_file_value("k").content, options.k);
    if (req.has_file("exclude_group")) {
      const auto group = req.get_file_value("exclude_group").content;
      if (!group.empty()) options.exclude_group = group;
    }
    if (ctx.matrices->images(ctx.images->model_id())->empty()) corpus_unavailable("no images are stored");
    const ImageInput input{image.filename.empty() ? std::string("upload") : image.filename, image.content};
    const auto hits = ctx.images->by_image(input, *ctx.image_embedder, options, make_retry_policy(ctx.config));
    send_json(res, 200, {{"measure", to_string(options.measure)}, {"hits", image_hits_json(hits)}});
  });

  s.Get(R"(/api/images/(-?\d+)/file)", [&ctx](const httplib::Request& req, httplib::Response& res) {
    const auto id = std::stoll(req.matches[1]);
    const auto record = ctx.store->get_image(id);
    if (!record) throw Error(ErrorCode::kNotFound, "unknown image id " + std::to_string(id));
    const auto bytes = read_file(record->path);
    if (!bytes) throw Error(ErrorCode::kNotFound, "image file missing: " + record->path);
    res.set_content(*bytes, content_type_for(*bytes));
  });

  s.Get("/api/documents", [&ctx](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& d : ctx.store->list_documents()) {
      json authors = json::array();
      for (const auto& a : d.authors) authors.push_back({{"forename", a.forename}, {"surname", a.surname}});
      out.push_back({{"doc_id", d.doc_id},
                     {"title", d.title},
                     {"display_name", d.display_name},
                     {"authors", authors},
                     {"word_count", d.word_count},
                     {"source_path", d.source_path}});
    }
    send_json(res, 200, {{"documents", out}});
  });

  s.Get(R"(/api/chunks/([^/]+))", [&ctx](const httplib::Request& req, httplib::Response& res) {
    const std::string text = req.matches[1];
    ChunkId id = 0;
    try {
      std::size_t used = 0;
      id = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      bad_request("chunk id must be an integer, got '" + text + "'");
    }
    const ChunkId ids[] = {id};
    send_json(res, 200, to_json(ctx.store->fetch_chunks(ids).front()));
  });

  s.Post("/api/ingest", [&ctx](const httplib::Request& req, httplib::Response& res) {
    std::string xml;
    std::string source = "upload.tei.xml";
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) bad_request("missing 'file' part");
      const auto file = req.get_file_value("file");
      xml = file.content;
      if (!file.filename.empty()) source = file.filename;
    } else {
      xml = req.body;
      if (req.has_param("source")) source = req.get_param_value("source");
    }
    if (xml.empty()) bad_request("empty TEI upload");
    IngestOptions options;
    options.chunking = ctx.config.chunking;
    options.embed = ctx.embed_options();
    send_json(res, 201, to_json(ingest_tei(xml, source, *ctx.store, *ctx.embedder, options)));
  });

  if (!ctx.config.static_dir.empty()) {
    if (!s.set_mount_point("/", ctx.config.static_dir.string())) {
      spdlog::warn("static directory {} not found; UI not served", ctx.config.static_dir.string());
    }
  }
}

}  // namespace scichat
