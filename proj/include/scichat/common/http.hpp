#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace scichat {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

struct MultipartPart {
  std::string name;
  std::string content;
  std::string filename;
  std::string content_type;
};

using HttpHeaders = std::multimap<std::string, std::string>;

// Minimal blocking HTTP client surface used by the provider clients. Transport
// failures (connection refused, timeouts) throw a transient ProviderError; any
// HTTP status is returned to the caller.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;

  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const std::string& content_type, const HttpHeaders& headers) = 0;

  virtual HttpResponse post_multipart(const std::string& url,
                                      const std::vector<MultipartPart>& parts,
                                      const HttpHeaders& headers) = 0;
};

struct HttpTransportOptions {
  std::chrono::seconds connect_timeout{10};
  std::chrono::seconds read_timeout{120};
};

std::shared_ptr<HttpTransport> make_http_transport(HttpTransportOptions options = {});

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always begins with '/'
};

// Throws Error(kInvalidArgument) for URLs without an http(s) scheme.
SplitUrl split_url(const std::string& url);

std::string join_url(const std::string& base, const std::string& path);

}  // namespace scichat
