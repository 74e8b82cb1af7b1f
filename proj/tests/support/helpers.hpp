#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scichat/common/http.hpp"
#include "scichat/common/rng.hpp"

namespace testing {

inline std::filesystem::path fixtures() { return SCICHAT_FIXTURES_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("scichat-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Records requests and answers from a script; unscripted calls get `fallback`.
class ScriptedTransport : public scichat::HttpTransport {
 public:
  struct Request {
    std::string url;
    std::string body;
    std::string content_type;
    scichat::HttpHeaders headers;
    std::vector<scichat::MultipartPart> parts;
  };
  using Handler = std::function<scichat::HttpResponse(const Request&)>;

  explicit ScriptedTransport(Handler fallback) : fallback_(std::move(fallback)) {}

  void queue(scichat::HttpResponse response) {
    std::lock_guard lock(mutex_);
    queued_.push_back(std::move(response));
  }

  scichat::HttpResponse post(const std::string& url, const std::string& body, const std::string& content_type,
                             const scichat::HttpHeaders& headers) override {
    return handle({url, body, content_type, headers, {}});
  }

  scichat::HttpResponse post_multipart(const std::string& url, const std::vector<scichat::MultipartPart>& parts,
                                       const scichat::HttpHeaders& headers) override {
    return handle({url, {}, "multipart/form-data", headers, parts});
  }

  std::vector<Request> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  scichat::HttpResponse handle(Request request) {
    std::unique_lock lock(mutex_);
    requests_.push_back(request);
    if (!queued_.empty()) {
      auto r = queued_.front();
      queued_.pop_front();
      return r;
    }
    lock.unlock();
    return fallback_(request);
  }

  Handler fallback_;
  mutable std::mutex mutex_;
  std::deque<scichat::HttpResponse> queued_;
  std::vector<Request> requests_;
};

// Random UTF-8 text mixing ASCII, 2-, 3- and 4-byte scalars.
inline std::string random_text(scichat::Rng& rng, std::size_t scalars) {
  static const char* pool[] = {"a", "b", " ", "\n", "e", "z", "é", "ß", "Ω", "水", "€", "😀", "x", ".", "0"};
  std::string out;
  for (std::size_t i = 0; i < scalars; ++i) out += pool[rng.uniform_index(std::size(pool))];
  return out;
}

inline std::vector<float> random_vector(scichat::Rng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

// Minimal TEI document with the given title, authors and body paragraphs.
inline std::string make_tei(const std::string& title, const std::vector<std::pair<std::string, std::string>>& authors,
                            const std::vector<std::string>& paragraphs) {
  std::string xml = R"(<?xml version="1.0" encoding="UTF-8"?><TEI xmlns="http://www.tei-c.org/ns/1.0"><teiHeader><fileDesc><titleStmt><title level="a" type="main">)" +
                    title + "</title></titleStmt><sourceDesc><biblStruct><analytic>";
  for (const auto& [fore, sur] : authors) {
    xml += "<author><persName><forename>" + fore + "</forename><surname>" + sur + "</surname></persName></author>";
  }
  xml += "</analytic></biblStruct></sourceDesc></fileDesc></teiHeader><text><body><div>";
  for (const auto& p : paragraphs) xml += "<p>" + p + "</p>";
  xml += "</div></body></text></TEI>";
  return xml;
}

}  // namespace testing
