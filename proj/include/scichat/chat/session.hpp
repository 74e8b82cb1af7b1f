#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace scichat {

struct Turn {
  std::string query;
  std::string response_text;

  bool operator==(const Turn&) const = default;
};

// Append-only conversation histories keyed by session id.
class SessionStore {
 public:
  // Creates the session if it does not exist yet.
  void append(const std::string& session_id, Turn turn);

  // The last `max_turns` turns, oldest first. Unknown sessions have no turns.
  std::vector<Turn> recent(const std::string& session_id, std::size_t max_turns) const;

  std::size_t turn_count(const std::string& session_id) const;
  std::string create();

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<Turn>> sessions_;
  std::size_t next_ = 1;
};

}  // namespace scichat
