#pragma once

#include <exception>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "scichat/chat/chat_engine.hpp"
#include "scichat/service/config.hpp"
#include "scichat/service/pipeline.hpp"

namespace httplib {
class Server;
}

namespace scichat {

// HTTP status for an exception escaping a handler: 400 validation, 404
// unknown id, 502 provider failure, 500 otherwise.
int http_status(const std::exception& error);

// {code, message, detail}
nlohmann::json error_body(std::string code, std::string message, nlohmann::json detail = nullptr);

nlohmann::json to_json(const ChatAnswer& answer);
nlohmann::json to_json(const StoredChunk& chunk);
nlohmann::json to_json(const ImageRecord& record);
nlohmann::json to_json(const IngestReport& report);

class Server {
 public:
  explicit Server(AppContext& context);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Blocks until stop(). Returns false if the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  void routes();

  AppContext& ctx_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace scichat
