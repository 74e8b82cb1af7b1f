#include "scichat/corpus/tei_parser.hpp"

#include <expat.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "scichat/common/hash.hpp"
#include "scichat/common/utf8.hpp"
#include "scichat/corpus/display_name.hpp"

namespace scichat {
namespace {

std::string_view local_name(std::string_view name) {
  const auto colon = name.rfind(':');
  return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

std::string_view attribute(const XML_Char** atts, std::string_view key) {
  for (std::size_t i = 0; atts[i] != nullptr; i += 2) {
    if (local_name(atts[i]) == key) return atts[i + 1];
  }
  return {};
}

bool is_block(std::string_view name) {
  return name == "p" || name == "head" || name == "formula" || name == "note" ||
         name == "item" || name == "list" || name == "div";
}

struct FigureBuilder {
  std::string head;
  std::string label;
  std::string caption;
  std::string graphic;
  std::string xml_id;
};

class TeiHandler {
 public:
  void start(std::string_view name, const XML_Char** atts) {
    stack_.emplace_back(name);
    const std::size_t depth = stack_.size();

    if (in_header_ && name == "title" && inside("titleStmt") && title_depth_ == 0) {
      const auto type = attribute(atts, "type");
      if (title_.empty() || type == "main") {
        title_depth_ = depth;
        title_buffer_.clear();
      }
    } else if (name == "teiHeader") {
      in_header_ = true;
    } else if (in_header_ && name == "author" && inside("sourceDesc")) {
      author_depth_ = depth;
      current_author_ = {};
      author_in_analytic_ = inside("analytic");
    } else if (author_depth_ != 0 && (name == "forename" || name == "surname") &&
               inside("persName")) {
      name_depth_ = depth;
      name_buffer_.clear();
    } else if (in_header_ && name == "abstract") {
      abstract_depth_ = depth;
    } else if (name == "body" && inside("text")) {
      in_body_ = true;
      saw_body_ = true;
    }

    if (figure_depth_ == 0 && name == "figure" && inside("text")) {
      if (attribute(atts, "type") != "table") {
        figure_depth_ = depth;
        figure_ = {};
        figure_.xml_id = std::string(attribute(atts, "id"));
      }
      if (in_body_ && skip_depth_ == 0) {
        flush_block();
        skip_depth_ = depth;
      }
    } else if (figure_depth_ != 0) {
      if (name == "head" || name == "label" || name == "figDesc") {
        figure_field_depth_ = depth;
        figure_field_ = std::string(name);
        field_buffer_.clear();
      } else if (name == "graphic" && figure_.graphic.empty()) {
        figure_.graphic = std::string(attribute(atts, "url"));
      }
    }

    if (in_body_ && skip_depth_ == 0) {
      const auto type = attribute(atts, "type");
      if (name == "listBibl" || name == "table" ||
          (name == "div" && (type == "references" || type == "bibliography"))) {
        flush_block();
        skip_depth_ = depth;
      } else if (is_block(name)) {
        flush_block();
      }
    }
    if (abstract_depth_ != 0 && is_block(name)) flush_abstract();
  }

  void end(std::string_view name) {
    const std::size_t depth = stack_.size();

    if (depth == title_depth_) {
      title_ = utf8::collapse_whitespace(title_buffer_);
      title_depth_ = 0;
    } else if (depth == name_depth_) {
      auto value = utf8::collapse_whitespace(name_buffer_);
      auto& slot = name == "surname" ? current_author_.surname : current_author_.forename;
      if (!slot.empty() && !value.empty()) slot.push_back(' ');
      slot += value;
      name_depth_ = 0;
    } else if (depth == author_depth_) {
      if (!current_author_.surname.empty() || !current_author_.forename.empty()) {
        (author_in_analytic_ ? analytic_authors_ : monograph_authors_).push_back(current_author_);
      }
      author_depth_ = 0;
    } else if (depth == abstract_depth_) {
      flush_abstract();
      abstract_depth_ = 0;
    } else if (name == "teiHeader") {
      in_header_ = false;
    }

    if (depth == figure_field_depth_) {
      auto value = utf8::collapse_whitespace(field_buffer_);
      if (figure_field_ == "head") figure_.head = value;
      if (figure_field_ == "label") figure_.label = value;
      if (figure_field_ == "figDesc") figure_.caption = value;
      figure_field_depth_ = 0;
    }
    if (depth == figure_depth_) {
      finish_figure();
      figure_depth_ = 0;
    }

    if (in_body_) {
      if (depth == skip_depth_) {
        skip_depth_ = 0;
      } else if (skip_depth_ == 0 && is_block(name)) {
        flush_block();
      }
      if (name == "body") {
        flush_block();
        in_body_ = false;
      }
    } else if (depth == skip_depth_) {
      skip_depth_ = 0;
    }
    stack_.pop_back();
  }

  void text(std::string_view data) {
    if (title_depth_ != 0) title_buffer_.append(data);
    if (name_depth_ != 0) name_buffer_.append(data);
    if (abstract_depth_ != 0) abstract_buffer_.append(data);
    if (figure_field_depth_ != 0) field_buffer_.append(data);
    if (in_body_ && skip_depth_ == 0) block_buffer_.append(data);
  }

  bool saw_body() const { return saw_body_; }

  void finish(ParsedDocument& out) {
    flush_block();
    out.document.title = title_;
    out.document.authors = analytic_authors_.empty() ? monograph_authors_ : analytic_authors_;
    out.document.abstract_text = join(abstract_paragraphs_);
    out.document.body_text = join(paragraphs_);
    out.document.word_count = utf8::count_words(out.document.body_text);
    out.figures = std::move(figures_);
  }

 private:
  bool inside(std::string_view name) const {
    for (const auto& frame : stack_) {
      if (frame == name) return true;
    }
    return false;
  }

  void flush_block() {
    auto paragraph = utf8::collapse_whitespace(block_buffer_);
    block_buffer_.clear();
    if (!paragraph.empty()) paragraphs_.push_back(std::move(paragraph));
  }

  void flush_abstract() {
    auto paragraph = utf8::collapse_whitespace(abstract_buffer_);
    abstract_buffer_.clear();
    if (!paragraph.empty()) abstract_paragraphs_.push_back(std::move(paragraph));
  }

  void finish_figure() {
    FigureRecord record;
    if (!figure_.head.empty()) {
      record.figure_label = figure_.head;
    } else if (!figure_.label.empty()) {
      record.figure_label = "Figure " + figure_.label;
    } else if (!figure_.xml_id.empty()) {
      record.figure_label = figure_.xml_id;
    } else {
      record.figure_label = "Figure " + std::to_string(figures_.size() + 1);
    }
    // Labels must be unique within a document.
    const std::string base = record.figure_label;
    for (int suffix = 2; label_taken(record.figure_label); ++suffix) {
      record.figure_label = base + " (" + std::to_string(suffix) + ")";
    }
    record.caption = figure_.caption;
    record.image_ref = figure_.graphic;
    figures_.push_back(std::move(record));
  }

  bool label_taken(const std::string& label) const {
    for (const auto& figure : figures_) {
      if (figure.figure_label == label) return true;
    }
    return false;
  }

  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& part : parts) {
      if (!out.empty()) out.push_back('\n');
      out += part;
    }
    return out;
  }

  std::vector<std::string> stack_;
  bool in_header_ = false;
  bool in_body_ = false;
  bool saw_body_ = false;

  std::size_t title_depth_ = 0;
  std::string title_buffer_;
  std::string title_;

  std::size_t author_depth_ = 0;
  std::size_t name_depth_ = 0;
  bool author_in_analytic_ = false;
  Author current_author_;
  std::string name_buffer_;
  std::vector<Author> analytic_authors_;
  std::vector<Author> monograph_authors_;

  std::size_t abstract_depth_ = 0;
  std::string abstract_buffer_;
  std::vector<std::string> abstract_paragraphs_;

  std::size_t skip_depth_ = 0;
  std::string block_buffer_;
  std::vector<std::string> paragraphs_;

  std::size_t figure_depth_ = 0;
  std::size_t figure_field_depth_ = 0;
  std::string figure_field_;
  std::string field_buffer_;
  FigureBuilder figure_;
  std::vector<FigureRecord> figures_;
};

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** atts) {
  static_cast<TeiHandler*>(user)->start(local_name(name), atts);
}

void XMLCALL on_end(void* user, const XML_Char* name) {
  static_cast<TeiHandler*>(user)->end(local_name(name));
}

void XMLCALL on_text(void* user, const XML_Char* data, int len) {
  static_cast<TeiHandler*>(user)->text(std::string_view(data, static_cast<std::size_t>(len)));
}

struct ParserDeleter {
  void operator()(XML_Parser parser) const { XML_ParserFree(parser); }
};

}  // namespace

std::string doc_id_for(std::string_view xml, const std::string& source_path) {
  if (!source_path.empty()) {
    auto stem = std::filesystem::path(source_path).stem();
    // Grobid names its output <name>.tei.xml or <name>.grobid.tei.xml.
    while (stem.has_extension()) stem = stem.stem();
    if (!stem.empty()) return stem.string();
  }
  std::ostringstream id;
  id << "doc-" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(xml);
  return id.str();
}

ParsedDocument parse_tei(std::string_view xml, const std::string& source_path) {
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate("UTF-8"));
  if (!parser) throw Error(ErrorCode::kIo, "cannot allocate XML parser");

  TeiHandler handler;
  XML_SetUserData(parser.get(), &handler);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    const auto offset = XML_GetCurrentByteIndex(parser.get());
    throw ParseError(std::string("malformed TEI XML: ") +
                         XML_ErrorString(XML_GetErrorCode(parser.get())),
                     offset < 0 ? 0 : static_cast<std::size_t>(offset));
  }

  ParsedDocument parsed;
  handler.finish(parsed);
  auto& doc = parsed.document;
  doc.doc_id = doc_id_for(xml, source_path);
  doc.source_path = source_path;
  if (doc.title.empty()) doc.title = doc.doc_id;
  doc.display_name = make_display_name(doc.authors, doc.title);
  for (auto& figure : parsed.figures) figure.doc_id = doc.doc_id;

  if (!handler.saw_body()) {
    throw EmptyDocumentError("TEI document " + doc.doc_id + " has no <body>", std::move(parsed));
  }
  return parsed;
}

ParsedDocument parse_tei_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_tei(buffer.str(), path);
}

}  // namespace scichat
