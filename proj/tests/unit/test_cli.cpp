#include <doctest.h>

#include <iostream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "helpers.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

struct Cli {
  testing::TempDir dir;
  std::filesystem::path ini = dir / "scichat.ini";

  explicit Cli(const std::string& stub = "count") {
    testing::spit(ini, "[store]\npath = " + (dir / "store.db").string() + "\ncache_dir = " + (dir / "cache").string() +
                           "\n[embedding]\nprovider = mock\ndim = 64\n"
                           "[llm]\nprovider = stub\nstub = " + stub + "\n"
                           "[images]\nprovider = mock\ndim = 16\n"
                           "[retry]\nmax_attempts = 1\nbase_delay_ms = 0\n");
  }

  Result run(std::vector<std::string> args, bool with_config = true) const {
    if (with_config) args.insert(args.begin(), {"--config", ini.string()});
    args.insert(args.begin(), "scichat");
    std::ostringstream out, err;
    Result r;
    r.code = scichat::run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  Result ingest() const {
    return run({"ingest", "--tei-dir", (testing::fixtures() / "tei").string()});
  }
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("usage errors exit with 2") {
  Cli cli;
  CHECK(cli.run({}, false).code == 2);
  CHECK(cli.run({"frobnicate"}).code == 2);
  CHECK(cli.run({"ask"}).code == 2);
  CHECK(cli.run({"ask", "-q", "x", "--mode", "all"}).code == 2);
  CHECK(cli.run({"ask", "-q", "x", "--temperature", "2.5"}).code == 2);
  CHECK(cli.run({"search"}).code == 2);
  CHECK(cli.run({"summarize"}).code == 2);
  CHECK(cli.run({"images"}).code == 2);
  CHECK(cli.run({"eval", "classify"}).code == 2);
  CHECK(cli.run({"--config", (cli.dir / "missing.ini").string(), "ingest"}, false).code == 2);
  const auto help = cli.run({"--help"}, false);
  CHECK(help.code == 0);
  CHECK(help.out.find("ingest") != std::string::npos);
}

TEST_CASE("runtime errors exit with 1") {
  Cli cli;
  testing::spit(cli.dir / "bad.ini", "[chunking]\nsizes = 3\n");
  const auto r = cli.run({"--config", (cli.dir / "bad.ini").string(), "ask", "-q", "x"}, false);
  CHECK(r.code == 1);
  CHECK(r.err.find("unknown key chunking.sizes") != std::string::npos);
  CHECK(cli.run({"embed-cache", "--inspect", cli.ini.string()}).code == 1);
}

TEST_CASE("ingest, ask, search and summarize") {
  Cli cli;
  const auto ing = cli.ingest();
  REQUIRE(ing.code == 0);
  CHECK(ing.out.find("ingested 3 documents") != std::string::npos);
  // Re-ingesting is idempotent.
  CHECK(cli.ingest().code == 0);

  const auto ask = cli.run({"ask", "-q", "What is reflectivity?", "--json"});
  REQUIRE(ask.code == 0);
  const auto answer = json::parse(ask.out);
  CHECK(answer["response_text"] == std::to_string(answer["provenance"].size()));
  CHECK(answer["temperature"] == 1.0);

  const auto plain = cli.run({"ask", "-q", "What is reflectivity?"});
  REQUIRE(plain.code == 0);
  std::string sources = "sources:";
  for (const auto& p : answer["provenance"]) sources += " " + std::to_string(p["chunk_id"].get<long long>());
  CHECK(plain.out.find(sources + "\n") != std::string::npos);

  const auto search = cli.run({"search", "--text", "nanoparticle size", "-k", "4", "--measure", "euclidean"});
  REQUIRE(search.code == 0);
  CHECK(search.out.find("# measure euclidean (lower is closer)") != std::string::npos);
  CHECK(count_lines(search.out) == 2 + 4);

  const auto summary_empty = cli.run({"ask", "-q", "x", "--mode", "summary"});
  CHECK(summary_empty.code == 0);
  CHECK(summary_empty.out.find("warning:") != std::string::npos);

  const auto sum = cli.run({"summarize", "--all"});
  REQUIRE(sum.code == 0);
  CHECK(sum.out.find("compression ratio") != std::string::npos);
  CHECK(count_lines(sum.out) == 4);
  const auto both = cli.run({"ask", "-q", "x", "--mode", "both", "--json"});
  REQUIRE(both.code == 0);
  CHECK(json::parse(both.out)["mode"] == "both");
}

TEST_CASE("embed-cache export and inspect") {
  Cli cli;
  REQUIRE(cli.ingest().code == 0);
  const auto out_dir = cli.dir / "vecs";
  const auto ex = cli.run({"embed-cache", "--out", out_dir.string()});
  REQUIRE(ex.code == 0);
  std::smatch m;
  REQUIRE(std::regex_search(ex.out, m, std::regex("(\\S+\\.vecs)\\t(\\d+) rows")));
  const auto inspect = cli.run({"embed-cache", "--inspect", m[1].str()});
  REQUIRE(inspect.code == 0);
  CHECK(inspect.out.find("dim 64\ncount " + m[2].str() + "\n") != std::string::npos);
}

TEST_CASE("images ingest and search") {
  Cli cli;
  const auto png = [](const std::string& b) { return std::string("\x89PNG\r\n\x1a\n", 8) + b; };
  std::filesystem::create_directories(cli.dir / "raw" / "e1");
  testing::spit(cli.dir / "raw" / "e1" / "a.png", png("a"));
  testing::spit(cli.dir / "raw" / "e1" / "b.png", png("b"));
  testing::spit(cli.dir / "fig.png", png("f"));
  testing::spit(cli.dir / "manifest.csv",
                "path,kind,doc_id,figure_label,group_key,caption\n"
                "raw/e1/a.png,raw,,,e1,\nraw/e1/b.png,raw,,,e1,\nfig.png,figure,doc1,Figure 2,,\"Peak, fitted\"\n"
                "missing.png,raw,,,,\n");
  const auto ing = cli.run({"images", "ingest", "--manifest", (cli.dir / "manifest.csv").string()});
  CHECK(ing.code == 0);
  CHECK(ing.out == "stored 3 images, 1 failed\n");
  CHECK(ing.err.find("missing.png") != std::string::npos);

  const auto by_file = cli.run({"search", "--image", (cli.dir / "raw" / "e1" / "a.png").string(), "-k", "3"});
  REQUIRE(by_file.code == 0);
  CHECK(by_file.out.find("# measure euclidean") != std::string::npos);
  CHECK(by_file.out.find("1\t0\t") != std::string::npos);

  const auto grouped = cli.run({"images", "search", "--query", (cli.dir / "raw" / "e1" / "a.png").string(),
                                "--exclude-group", "e1"});
  REQUIRE(grouped.code == 0);
  CHECK(grouped.out.find("\te1\t") == std::string::npos);
  CHECK(grouped.out.find("fig.png") != std::string::npos);
  CHECK(cli.run({"images", "search", "--id", "424242"}).code == 1);
}

TEST_CASE("eval rank and classify") {
  Cli cli("SA");
  REQUIRE(cli.ingest().code == 0);
  const auto csv = cli.dir / "rank.csv";
  const auto report = cli.dir / "rank.json";
  const auto rank = cli.run({"eval", "rank", "--pairs", "3", "--seed", "5", "--csv", csv.string(), "--report",
                             report.string()});
  REQUIRE(rank.code == 0);
  CHECK(rank.out.find("judged 3 of 3 pairs; misordered 0 (0.0%), 0 cycles") != std::string::npos);
  const auto r = json::parse(testing::slurp(report));
  CHECK(r["documents"] == 3);
  CHECK(r["misordered"] == 0);
  CHECK(count_lines(testing::slurp(csv)) == 4);

  // Table of ground truth (rows) against predictions (columns).
  testing::spit(cli.dir / "confusion.csv",
                "truth,SA,Mat,Sca,ML,PR,Other\n"
                "SA,60,2,0,0,0,1\nMat,16,31,10,1,0,0\nSca,0,0,11,0,0,0\n"
                "ML,0,1,5,16,0,1\nPR,0,1,0,0,10,0\nOther,0,2,1,0,0,2\n");
  const auto cls = cli.run({"eval", "classify", "--confusion", (cli.dir / "confusion.csv").string(), "--csv",
                            (cli.dir / "m.csv").string(), "--report", (cli.dir / "m.json").string()});
  REQUIRE(cls.code == 0);
  CHECK(cls.out.find("SA\t78.9\t95.2\t88.9\n") != std::string::npos);
  CHECK(json::parse(testing::slurp(cli.dir / "m.json"))["classified"] == 171);

  testing::spit(cli.dir / "cats.txt", "SA\nMat\n");
  std::string truth = "doc_id,label\n";
  const auto ordering = testing::slurp(csv);
  std::smatch m;
  std::string rest = ordering;
  std::vector<std::string> ids;
  while (std::regex_search(rest, m, std::regex("\n\\d+,([^,]+),"))) {
    ids.push_back(m[1]);
    rest = m.suffix();
  }
  REQUIRE(ids.size() == 3);
  truth += ids[0] + ",SA\n" + ids[1] + ",SA\n" + ids[2] + ",Mat\n";
  testing::spit(cli.dir / "truth.csv", truth);
  const auto live = cli.run({"eval", "classify", "--categories", (cli.dir / "cats.txt").string(), "--truth",
                             (cli.dir / "truth.csv").string(), "--report", (cli.dir / "c.json").string(), "--csv",
                             (cli.dir / "c.csv").string()});
  REQUIRE(live.code == 0);
  const auto c = json::parse(testing::slurp(cli.dir / "c.json"));
  CHECK(c["confusion"] == json::array({json::array({2, 0}), json::array({1, 0})}));
}

TEST_CASE("project writes SVG and CSV") {
  Cli cli;
  REQUIRE(cli.ingest().code == 0);
  const auto svg = cli.dir / "map.svg";
  const auto csv = cli.dir / "map.csv";
  const auto r = cli.run({"project", "--perplexity", "3", "--iters", "300", "--seed", "2", "--out", svg.string(),
                          "--csv", csv.string(), "--highlight", "2"});
  REQUIRE(r.code == 0);
  const auto text = testing::slurp(svg);
  CHECK(text.starts_with("<svg"));
  const auto rows = count_lines(testing::slurp(csv)) - 1;
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) > rows);
  CHECK(r.out == "projected " + std::to_string(rows) + " chunks to " + svg.string() + "\n");

  const auto d = cli.run({"project", "--perplexity", "3", "--iters", "300", "--out", (cli.dir / "d.svg").string(),
                          "--displacement", "raw-vs-augmented"});
  REQUIRE(d.code == 0);
  CHECK(d.out.find("nearest-centroid agreement: raw ") != std::string::npos);
  CHECK(cli.run({"project", "--kind", "summary", "--out", svg.string()}).code == 1);
}

TEST_CASE("chat reads queries from stdin") {
  Cli cli;
  REQUIRE(cli.ingest().code == 0);
  std::istringstream in("first question\n\nsecond question\n/quit\nnever asked\n");
  auto* old = std::cin.rdbuf(in.rdbuf());
  const auto r = cli.run({"chat"});
  std::cin.rdbuf(old);
  REQUIRE(r.code == 0);
  std::size_t answers = 0;
  for (auto at = r.out.find("sources:"); at != std::string::npos; at = r.out.find("sources:", at + 1)) ++answers;
  CHECK(answers == 2);
}
