#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "scichat/common/utf8.hpp"
#include "scichat/corpus/chunker.hpp"
#include "scichat/corpus/display_name.hpp"
#include "scichat/corpus/pdf_converter.hpp"
#include "scichat/corpus/tei_parser.hpp"

using namespace scichat;

TEST_CASE("minimal TEI: title, one author, two-word body") {
  const auto xml = testing::make_tei("T", {{"Ada", "Okafor"}}, {"hello world"});
  const auto parsed = parse_tei(xml, "minimal.tei.xml");
  CHECK(parsed.document.doc_id == "minimal");
  CHECK(parsed.document.title == "T");
  REQUIRE(parsed.document.authors.size() == 1);
  CHECK(parsed.document.authors[0].surname == "Okafor");
  CHECK(parsed.document.body_text == "hello world");
  CHECK(parsed.document.word_count == 2);
  CHECK(parsed.document.display_name == "Okafor \"T\"");
}

TEST_CASE("bibliography, tables and header do not reach the body") {
  const std::string xml = R"(<TEI xmlns="http://www.tei-c.org/ns/1.0"><teiHeader><fileDesc><titleStmt><title type="main">R</title></titleStmt></fileDesc>
    <profileDesc><abstract><p>abstract words</p></abstract></profileDesc></teiHeader>
    <text><body><div><p>kept text</p><note>a footnote</note>
      <figure type="table"><table><row><cell>cell value</cell></row></table></figure>
      <listBibl><biblStruct><title>ref one</title></biblStruct></listBibl></div>
      <div type="references"><p>reference two</p></div></body>
    <back><div type="references"><listBibl><biblStruct><title>ref three</title></biblStruct></listBibl></div></back></text></TEI>)";
  const auto parsed = parse_tei(xml, "r.xml");
  const auto& body = parsed.document.body_text;
  CHECK(body.find("kept text") != std::string::npos);
  CHECK(body.find("a footnote") != std::string::npos);
  CHECK(body.find("ref one") == std::string::npos);
  CHECK(body.find("reference two") == std::string::npos);
  CHECK(body.find("ref three") == std::string::npos);
  CHECK(body.find("cell value") == std::string::npos);
  CHECK(body.find("abstract words") == std::string::npos);
  CHECK(parsed.document.abstract_text == "abstract words");
}

TEST_CASE("fixture papers parse with figures and authors") {
  const auto parsed = parse_tei_file((testing::fixtures() / "tei/saxs_nanoparticles.xml").string());
  CHECK(parsed.document.doc_id == "saxs_nanoparticles");
  CHECK(parsed.document.authors.size() == 3);
  CHECK(parsed.document.display_name ==
        "Okafor, Schmidt, et al. \"Small-angle scattering of gold nanoparticle superlattices\"");
  REQUIRE(parsed.figures.size() == 1);
  CHECK(parsed.figures[0].figure_label == "Figure 1");
  CHECK(parsed.figures[0].caption.find("bcc peaks") != std::string::npos);
  CHECK(parsed.figures[0].image_ref == "fig1.png");
  CHECK(parsed.document.body_text.find("Earlier superlattice work") == std::string::npos);
  CHECK(parsed.document.body_text.find("Integrated SAXS intensity") == std::string::npos);
  CHECK(parsed.document.body_text.find("√2 : √4 : √6") != std::string::npos);
}

TEST_CASE("malformed XML reports a byte offset") {
  const auto xml = testing::slurp(testing::fixtures() / "bad/malformed.xml");
  try {
    parse_tei(xml, "malformed.xml");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(e.byte_offset() > 0);
    CHECK(e.byte_offset() <= xml.size());
  }
}

TEST_CASE("missing body is an empty-document error keeping the header") {
  const auto xml = testing::slurp(testing::fixtures() / "bad/no_body.xml");
  try {
    parse_tei(xml, "no_body.xml");
    FAIL("expected EmptyDocumentError");
  } catch (const EmptyDocumentError& e) {
    CHECK(e.code() == ErrorCode::kEmptyDocument);
    CHECK(e.partial().document.title == "A header-only record");
    CHECK(e.partial().document.body_text.empty());
  }
}

TEST_CASE("parsing is deterministic and ids fall back to a content hash") {
  const auto xml = testing::make_tei("T", {}, {"a b c"});
  CHECK(parse_tei(xml).document == parse_tei(xml).document);
  CHECK(parse_tei(xml).document.doc_id.rfind("doc-", 0) == 0);
  CHECK(doc_id_for(xml, "dir/paper.grobid.tei.xml") == "paper");
}

TEST_CASE("display names") {
  const std::vector<Author> two = {{"A", "Lu"}, {"B", "Ocko"}};
  CHECK(make_display_name(two, "T") == "Lu, Ocko, et al. \"T\"");
  const std::vector<Author> three = {{"A", "Lu"}, {"C", "Mid"}, {"B", "Ocko"}};
  CHECK(make_display_name(three, "T") == "Lu, Ocko, et al. \"T\"");
  const std::vector<Author> one = {{"K", "Okafor"}};
  CHECK(make_display_name(one, "T") == "Okafor \"T\"");
  CHECK(make_display_name({}, "T") == "\"T\"");
  CHECK_THROWS_AS(make_display_name(one, ""), Error);
  CHECK(augment_chunk_text("N", "body") == std::string("N") + std::string(kDisplayNameSeparator) + "body");
}

TEST_CASE("chunk spans: worked examples") {
  const ChunkingParams p{1400, 280};
  const auto spans = chunk_spans(3000, p);
  REQUIRE(spans.size() == 3);
  CHECK(spans[0].start == 0);
  CHECK(spans[1].start == 1120);
  CHECK(spans[2].start == 2240);
  CHECK(spans[2].end - spans[2].start == 760);

  const auto one = chunk_spans(1000, p);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == ChunkSpan{0, 1000});

  CHECK(expected_chunk_count(100000, p) == oracle::sliding_window_count(100000, 1400, 280));
  CHECK(chunk_spans(100000, p).size() == oracle::sliding_window_count(100000, 1400, 280));
  CHECK(expected_chunk_count(0, p) == 0);
  CHECK(chunk_spans(0, p).empty());
}

TEST_CASE("chunk parameters are validated") {
  CHECK_THROWS_AS(ChunkingParams({100, 100}).validate(), Error);
  CHECK_THROWS_AS(ChunkingParams({100, 150}).validate(), Error);
  CHECK_THROWS_AS(ChunkingParams({0, 0}).validate(), Error);
  CHECK_NOTHROW(ChunkingParams({1, 0}).validate());
  CHECK_THROWS_AS(chunk_text("abc", {10, 10}), Error);
}

TEST_CASE("chunk spans match the sliding-window oracle for many lengths") {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const std::size_t size = 1 + rng.uniform_index(200);
    const std::size_t overlap = rng.uniform_index(size);
    const std::size_t len = rng.uniform_index(2000);
    const auto spans = chunk_spans(len, {size, overlap});
    const auto expected = oracle::sliding_windows(len, size, overlap);
    REQUIRE(spans.size() == expected.size());
    for (std::size_t k = 0; k < spans.size(); ++k) {
      CHECK(spans[k].start == expected[k].first);
      CHECK(spans[k].end == expected[k].second);
      CHECK(spans[k].end > spans[k].start);
    }
  }
}

TEST_CASE("chunks never split a multibyte scalar and reconstruct the text") {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto text = testing::random_text(rng, rng.uniform_index(3000));
    const std::size_t size = 2 + rng.uniform_index(300);
    const std::size_t overlap = rng.uniform_index(size);
    const auto chunks = chunk_text(text, {size, overlap});
    const auto scalars = oracle::decode(text);
    std::u32string rebuilt;
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      REQUIRE(utf8::is_valid(chunks[k].raw_text));
      const auto c = oracle::decode(chunks[k].raw_text);
      CHECK(chunks[k].char_start == k * (size - overlap));
      CHECK(c == scalars.substr(chunks[k].char_start, chunks[k].char_end - chunks[k].char_start));
      rebuilt += k == 0 ? c : c.substr(std::min(overlap, c.size()));
    }
    CHECK(rebuilt == scalars);
  }
}

TEST_CASE("chunk_document prepends the display name and derives stable ids") {
  const auto chunks = chunk_document("d1", "Lu \"T\"", std::string(3000, 'x'), {1400, 280});
  REQUIRE(chunks.size() == 3);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    CHECK(chunks[i].doc_id == "d1");
    CHECK(chunks[i].ordinal == i);
    CHECK(chunks[i].kind == ChunkKind::kRaw);
    CHECK(chunks[i].augmented_text == augment_chunk_text("Lu \"T\"", chunks[i].raw_text));
    CHECK(chunks[i].chunk_id == make_chunk_id("d1", ChunkKind::kRaw, i));
    CHECK(chunks[i].chunk_id < (std::int64_t(1) << 53));
  }
  CHECK(make_chunk_id("d1", ChunkKind::kRaw, 0) != make_chunk_id("d1", ChunkKind::kSummary, 0));
  CHECK(chunk_document("d1", "n", "", {1400, 280}).empty());
}

TEST_CASE("Grobid client posts the PDF and returns TEI") {
  testing::TempDir dir;
  testing::spit(dir / "paper.pdf", "%PDF-1.4 fake");
  auto transport = std::make_shared<testing::ScriptedTransport>([](const auto&) {
    return HttpResponse{200, "<TEI/>", "application/xml"};
  });
  GrobidClient client("http://grobid:8070", transport);
  CHECK(client.convert(dir / "paper.pdf") == "<TEI/>");
  const auto requests = transport->requests();
  REQUIRE(requests.size() == 1);
  CHECK(requests[0].url == "http://grobid:8070/api/processFulltextDocument");
  REQUIRE(requests[0].parts.size() == 1);
  CHECK(requests[0].parts[0].name == "input");
  CHECK(requests[0].parts[0].content == "%PDF-1.4 fake");

  transport->queue({503, "busy", "text/plain"});
  try {
    client.convert(dir / "paper.pdf");
    FAIL("expected a provider error");
  } catch (const ProviderError& e) {
    CHECK(e.transient());
  }
  transport->queue({400, "bad", "text/plain"});
  try {
    client.convert(dir / "paper.pdf");
    FAIL("expected a provider error");
  } catch (const ProviderError& e) {
    CHECK_FALSE(e.transient());
    CHECK(e.status() == 400);
  }
  CHECK_THROWS_AS(client.convert(dir / "missing.pdf"), Error);
}
