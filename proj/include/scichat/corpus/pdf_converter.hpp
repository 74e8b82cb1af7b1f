#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "scichat/common/http.hpp"

namespace scichat {

// Turns a PDF into TEI XML.
class PdfConverter {
 public:
  virtual ~PdfConverter() = default;
  virtual std::string convert(const std::filesystem::path& pdf_path) = 0;
};

// Client for a Grobid server's /api/processFulltextDocument endpoint.
class GrobidClient : public PdfConverter {
 public:
  GrobidClient(std::string base_url, std::shared_ptr<HttpTransport> transport);

  std::string convert(const std::filesystem::path& pdf_path) override;
  std::string convert_bytes(const std::string& pdf_bytes, const std::string& filename);

 private:
  std::string base_url_;
  std::shared_ptr<HttpTransport> transport_;
};

}  // namespace scichat
