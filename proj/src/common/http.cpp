#include "scichat/common/http.hpp"

#include <httplib.h>

#include "scichat/common/error.hpp"

namespace scichat {
namespace {

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(HttpTransportOptions options) : options_(options) {}

  HttpResponse post(const std::string& url, const std::string& body,
                    const std::string& content_type, const HttpHeaders& headers) override {
    const auto target = split_url(url);
    auto client = make_client(target.origin);
    return convert(client.Post(target.path, to_headers(headers), body, content_type), url);
  }

  HttpResponse post_multipart(const std::string& url, const std::vector<MultipartPart>& parts,
                              const HttpHeaders& headers) override {
    const auto target = split_url(url);
    auto client = make_client(target.origin);
    httplib::MultipartFormDataItems items;
    items.reserve(parts.size());
    for (const auto& part : parts) {
      items.push_back({part.name, part.content, part.filename, part.content_type});
    }
    return convert(client.Post(target.path, to_headers(headers), items), url);
  }

 private:
  httplib::Client make_client(const std::string& origin) const {
    httplib::Client client(origin);
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    client.set_write_timeout(options_.read_timeout);
    return client;
  }

  static httplib::Headers to_headers(const HttpHeaders& headers) {
    return httplib::Headers(headers.begin(), headers.end());
  }

  static HttpResponse convert(const httplib::Result& result, const std::string& url) {
    if (!result) {
      throw transient_error("HTTP request to " + url + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body, result->get_header_value("Content-Type")};
  }

  HttpTransportOptions options_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(HttpTransportOptions options) {
  return std::make_shared<HttplibTransport>(options);
}

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "URL needs an http(s) scheme: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported URL scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string join_url(const std::string& base, const std::string& path) {
  if (base.empty()) return path;
  const bool base_slash = base.back() == '/';
  const bool path_slash = !path.empty() && path.front() == '/';
  if (base_slash && path_slash) return base + path.substr(1);
  if (!base_slash && !path_slash) return base + "/" + path;
  return base + path;
}

}  // namespace scichat
