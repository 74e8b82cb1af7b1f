#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scichat/common/error.hpp"
#include "scichat/corpus/document.hpp"

namespace scichat {

struct ParsedDocument {
  DocumentRecord document;
  std::vector<FigureRecord> figures;
};

// Thrown when the TEI has no <body>. The header fields that were found are kept
// so the caller can still record the document.
class EmptyDocumentError : public Error {
 public:
  EmptyDocumentError(const std::string& message, ParsedDocument partial)
      : Error(ErrorCode::kEmptyDocument, message), partial_(std::move(partial)) {}

  const ParsedDocument& partial() const noexcept { return partial_; }

 private:
  ParsedDocument partial_;
};

// Parses Grobid TEI XML. doc_id is the file stem of source_path when given,
// otherwise a content hash of the XML.
//
// Throws ParseError (with byte offset) on malformed XML and EmptyDocumentError
// when there is no <body> element.
ParsedDocument parse_tei(std::string_view xml, const std::string& source_path = {});

ParsedDocument parse_tei_file(const std::string& path);

std::string doc_id_for(std::string_view xml, const std::string& source_path);

}  // namespace scichat
