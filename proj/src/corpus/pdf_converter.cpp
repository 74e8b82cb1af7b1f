#include "scichat/corpus/pdf_converter.hpp"

#include <fstream>
#include <sstream>

#include "scichat/common/error.hpp"

namespace scichat {

GrobidClient::GrobidClient(std::string base_url, std::shared_ptr<HttpTransport> transport)
    : base_url_(std::move(base_url)), transport_(std::move(transport)) {}

std::string GrobidClient::convert(const std::filesystem::path& pdf_path) {
  std::ifstream in(pdf_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + pdf_path.string());
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return convert_bytes(bytes.str(), pdf_path.filename().string());
}

std::string GrobidClient::convert_bytes(const std::string& pdf_bytes, const std::string& filename) {
  const auto url = join_url(base_url_, "/api/processFulltextDocument");
  const auto response = transport_->post_multipart(
      url, {{"input", pdf_bytes, filename, "application/pdf"}}, {{"Accept", "application/xml"}});
  if (response.status == 200) return response.body;
  const auto message = "Grobid returned HTTP " + std::to_string(response.status) + " for " + filename;
  if (is_retryable_status(response.status)) throw transient_error(message, response.status);
  throw permanent_error(message, response.status);
}

}  // namespace scichat
