#include "scichat/chat/session.hpp"

#include <algorithm>

namespace scichat {

void SessionStore::append(const std::string& session_id, Turn turn) {
  std::lock_guard lock(mutex_);
  sessions_[session_id].push_back(std::move(turn));
}

std::vector<Turn> SessionStore::recent(const std::string& session_id, std::size_t max_turns) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end() || max_turns == 0) return {};
  const auto& turns = it->second;
  const auto count = std::min(max_turns, turns.size());
  return {turns.end() - static_cast<std::ptrdiff_t>(count), turns.end()};
}

std::size_t SessionStore::turn_count(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  return it == sessions_.end() ? 0 : it->second.size();
}

std::string SessionStore::create() {
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = "s" + std::to_string(next_++);
  } while (sessions_.contains(id));
  sessions_[id];
  return id;
}

}  // namespace scichat
