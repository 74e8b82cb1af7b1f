#include "scichat/service/config.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "scichat/common/error.hpp"

extern char** environ;

namespace scichat {
namespace {

std::size_t to_size(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const auto parsed = std::stoll(value, &used);
    if (used != value.size() || parsed < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(parsed);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "config " + key + ": expected a non-negative integer, got '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "config " + key + ": expected a number, got '" + value + "'");
  }
}

std::string unquote(std::string value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
  std::string out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] == '\\' && i + 1 < value.size() && value[i + 1] == 'n') {
      out += '\n';
      ++i;
    } else {
      out += value[i];
    }
  }
  return out;
}

using Setter = std::function<void(AppConfig&, const std::string&)>;

std::map<std::string, Setter> setters() {
  std::map<std::string, Setter> s;
  s["store.path"] = [](AppConfig& c, const std::string& v) { c.store_path = v; };
  s["store.cache_dir"] = [](AppConfig& c, const std::string& v) { c.cache_dir = v; };
  s["chunking.size"] = [](AppConfig& c, const std::string& v) { c.chunking.chunk_size = to_size("chunking.size", v); };
  s["chunking.overlap"] = [](AppConfig& c, const std::string& v) { c.chunking.overlap = to_size("chunking.overlap", v); };
  s["budget.total_chars"] = [](AppConfig& c, const std::string& v) { c.budget.total_chars = to_size("budget.total_chars", v); };
  s["budget.response_reserve_chars"] = [](AppConfig& c, const std::string& v) {
    c.budget.response_reserve_chars = to_size("budget.response_reserve_chars", v);
  };
  s["budget.chars_per_token"] = [](AppConfig& c, const std::string& v) {
    c.budget.chars_per_token = to_size("budget.chars_per_token", v);
  };
  s["prompt.instruction_template"] = [](AppConfig& c, const std::string& v) { c.instruction = v; };
  s["prompt.mode"] = [](AppConfig& c, const std::string& v) { c.mode = parse_corpus_mode(v); };
  s["embedding.provider"] = [](AppConfig& c, const std::string& v) { c.embedding.provider = v; };
  s["embedding.base_url"] = [](AppConfig& c, const std::string& v) { c.embedding.base_url = v; };
  s["embedding.model"] = [](AppConfig& c, const std::string& v) { c.embedding.model = v; };
  s["embedding.dim"] = [](AppConfig& c, const std::string& v) { c.embedding.dim = to_size("embedding.dim", v); };
  s["embedding.api_key"] = [](AppConfig& c, const std::string& v) { c.embedding.api_key = v; };
  s["embedding.batch_size"] = [](AppConfig& c, const std::string& v) {
    c.embedding.batch_size = to_size("embedding.batch_size", v);
  };
  s["embedding.max_concurrency"] = [](AppConfig& c, const std::string& v) {
    c.embedding.max_concurrency = static_cast<int>(to_size("embedding.max_concurrency", v));
  };
  s["embedding.seed"] = [](AppConfig& c, const std::string& v) { c.embedding.seed = to_size("embedding.seed", v); };
  s["llm.provider"] = [](AppConfig& c, const std::string& v) { c.llm.provider = v; };
  s["llm.stub"] = [](AppConfig& c, const std::string& v) { c.llm.stub = v; };
  s["llm.base_url"] = [](AppConfig& c, const std::string& v) { c.llm.base_url = v; };
  s["llm.model"] = [](AppConfig& c, const std::string& v) { c.llm.model = v; };
  s["llm.api_key"] = [](AppConfig& c, const std::string& v) { c.llm.api_key = v; };
  s["llm.temperature"] = [](AppConfig& c, const std::string& v) {
    c.llm.temperature = to_double("llm.temperature", v);
    check_temperature(c.llm.temperature);
  };
  s["llm.max_concurrency"] = [](AppConfig& c, const std::string& v) {
    c.llm.max_concurrency = static_cast<int>(to_size("llm.max_concurrency", v));
  };
  s["images.provider"] = [](AppConfig& c, const std::string& v) { c.images.provider = v; };
  s["images.url"] = [](AppConfig& c, const std::string& v) { c.images.url = v; };
  s["images.model"] = [](AppConfig& c, const std::string& v) { c.images.model = v; };
  s["images.dim"] = [](AppConfig& c, const std::string& v) { c.images.dim = to_size("images.dim", v); };
  s["images.dir"] = [](AppConfig& c, const std::string& v) { c.images.dir = v; };
  s["grobid.url"] = [](AppConfig& c, const std::string& v) { c.grobid_url = v; };
  s["summarizer.instruction"] = [](AppConfig& c, const std::string& v) { c.summary_instruction = v; };
  s["chat.k_cap"] = [](AppConfig& c, const std::string& v) { c.k_cap = to_size("chat.k_cap", v); };
  s["chat.history_turns"] = [](AppConfig& c, const std::string& v) { c.history_turns = to_size("chat.history_turns", v); };
  s["retry.max_attempts"] = [](AppConfig& c, const std::string& v) {
    c.retry_attempts = static_cast<int>(std::max<std::size_t>(1, to_size("retry.max_attempts", v)));
  };
  s["retry.base_delay_ms"] = [](AppConfig& c, const std::string& v) {
    c.retry_base_delay_ms = static_cast<int>(to_size("retry.base_delay_ms", v));
  };
  s["server.addr"] = [](AppConfig& c, const std::string& v) { c.server_addr = v; };
  s["server.static_dir"] = [](AppConfig& c, const std::string& v) { c.static_dir = v; };
  return s;
}

std::string env_name(const std::string& key) {
  std::string out = "SCICHAT_";
  for (const char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Environment process_environment() {
  Environment env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry = *e;
    const auto eq = entry.find('=');
    if (eq != std::string::npos) env[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return env;
}

AppConfig load_config(const std::filesystem::path& path, const Environment& env) {
  AppConfig config;
  const auto table = setters();
  if (!path.empty()) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(ErrorCode::kFormat, std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) {
        throw Error(ErrorCode::kFormat, "config " + path.string() + ": key '" + section + "' must be inside a section");
      }
      for (const auto& [name, value] : body) {
        const auto key = section + "." + name;
        const auto it = table.find(key);
        if (it == table.end()) throw Error(ErrorCode::kFormat, "config " + path.string() + ": unknown key " + key);
        it->second(config, unquote(value.get_value<std::string>()));
      }
    }
  }
  for (const auto& [key, set] : table) {
    if (const auto it = env.find(env_name(key)); it != env.end()) set(config, it->second);
  }
  if (const auto it = env.find("OPENAI_API_KEY"); it != env.end()) {
    if (config.embedding.api_key.empty()) config.embedding.api_key = it->second;
    if (config.llm.api_key.empty()) config.llm.api_key = it->second;
  }
  config.chunking.validate();
  config.budget.validate();
  return config;
}

std::pair<std::string, int> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon + 1 == addr.size()) {
    throw Error(ErrorCode::kInvalidArgument, "address '" + addr + "' must be host:port");
  }
  const auto port = to_size("addr", addr.substr(colon + 1));
  if (port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range in '" + addr + "'");
  const auto host = colon == 0 ? std::string("0.0.0.0") : addr.substr(0, colon);
  return {host, static_cast<int>(port)};
}

RetryPolicy make_retry_policy(const AppConfig& config) {
  RetryPolicy policy;
  policy.max_attempts = config.retry_attempts;
  policy.base_delay = std::chrono::milliseconds(config.retry_base_delay_ms);
  return policy;
}

EmbedOptions AppContext::embed_options() const {
  EmbedOptions options;
  options.batch_size = config.embedding.batch_size;
  options.retry = make_retry_policy(config);
  return options;
}

std::unique_ptr<AppContext> AppContext::create(AppConfig config) {
  auto ctx = std::make_unique<AppContext>();
  ctx->config = std::move(config);
  const auto& c = ctx->config;
  ctx->store = open_sqlite_store(c.store_path);
  ctx->matrices = std::make_unique<MatrixCache>(*ctx->store);
  ctx->transport = make_http_transport();

  if (c.embedding.provider == "mock") {
    ctx->embedder = std::make_unique<MockTextEmbedder>(c.embedding.dim, c.embedding.seed);
  } else if (c.embedding.provider == "hashing") {
    ctx->embedder = std::make_unique<HashingTextEmbedder>(c.embedding.dim);
  } else if (c.embedding.provider == "http") {
    HttpTextEmbedder::Options o;
    o.base_url = c.embedding.base_url;
    o.model = c.embedding.model;
    o.api_key = c.embedding.api_key;
    o.dim = c.embedding.dim;
    o.max_concurrency = c.embedding.max_concurrency;
    ctx->embedder = std::make_unique<HttpTextEmbedder>(o, ctx->transport);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown embedding provider " + c.embedding.provider);
  }

  if (c.llm.provider == "stub") {
    StubChatProvider::Reply reply;
    if (c.llm.stub == "count") {
      reply = stubs::count_chunks();
    } else if (c.llm.stub == "echo") {
      reply = stubs::echo_prefix(100);
    } else {
      reply = stubs::constant(c.llm.stub);
    }
    ctx->llm = std::make_unique<StubChatProvider>(reply, "stub-" + c.llm.stub.substr(0, 16));
  } else if (c.llm.provider == "http") {
    HttpChatProvider::Options o;
    o.base_url = c.llm.base_url;
    o.model = c.llm.model;
    o.api_key = c.llm.api_key;
    o.max_concurrency = c.llm.max_concurrency;
    ctx->llm = std::make_unique<HttpChatProvider>(o, ctx->transport);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown llm provider " + c.llm.provider);
  }

  if (c.images.provider == "mock") {
    ctx->image_embedder = std::make_unique<MockImageEmbedder>(c.images.dim);
  } else if (c.images.provider == "precomputed") {
    ctx->image_embedder = std::make_unique<PrecomputedImageEmbedder>(c.images.dir, c.images.model, c.images.dim);
  } else if (c.images.provider == "http") {
    HttpImageEmbedder::Options o;
    o.url = c.images.url;
    o.model = c.images.model;
    o.dim = c.images.dim;
    ctx->image_embedder = std::make_unique<HttpImageEmbedder>(o, ctx->transport);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown image provider " + c.images.provider);
  }

  ctx->converter = std::make_unique<GrobidClient>(c.grobid_url, ctx->transport);

  ChatEngineConfig engine;
  engine.instruction = c.instruction;
  engine.budget = c.budget;
  engine.history_turns = c.history_turns;
  engine.embed = ctx->embed_options();
  engine.retry = make_retry_policy(c);
  ctx->engine = std::make_unique<ChatEngine>(*ctx->store, *ctx->matrices, *ctx->embedder, *ctx->llm, engine);
  ctx->images = std::make_unique<ImageSearch>(*ctx->store, *ctx->matrices, ctx->image_embedder->model_id());
  return ctx;
}

}  // namespace scichat
