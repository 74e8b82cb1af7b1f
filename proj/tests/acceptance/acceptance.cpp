// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "scichat/chat/chat_engine.hpp"
#include "scichat/common/error.hpp"
#include "scichat/corpus/chunker.hpp"
#include "scichat/embedding/vector_cache.hpp"
#include "scichat/eval/classification.hpp"
#include "scichat/eval/ranking.hpp"
#include "scichat/llm/chat_provider.hpp"
#include "scichat/projection/tsne.hpp"
#include "scichat/prompt/prompt_builder.hpp"
#include "scichat/retrieval/retrieval.hpp"
#include "scichat/service/pipeline.hpp"
#include "scichat/store/matrix_cache.hpp"
#include "scichat/summarizer/summarizer.hpp"

using namespace scichat;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects the first few violations of a criterion.
struct Check {
  Outcome out;
  int shown = 0;
  void fail(const std::string& why) {
    out.ok = false;
    if (shown++ < 3) out.detail += (out.detail.empty() ? "" : "; ") + why;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.ok = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("over time limit");
  }
  if (!o.ok) ++failures;
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << (o.ok ? "PASS" : "FAIL") << " [" << id << "] " << name << " (" << secs << " s, limit " << limit_s << " s)";
  if (!o.detail.empty()) line << ": " << o.detail;
  std::cout << line.str() << std::endl;
}

oracle::Measure as_oracle(SimilarityMeasure m) {
  switch (m) {
    case SimilarityMeasure::kCosine: return oracle::Measure::kCosine;
    case SimilarityMeasure::kEuclidean: return oracle::Measure::kEuclidean;
    case SimilarityMeasure::kDot: return oracle::Measure::kDot;
  }
  return oracle::Measure::kDot;
}

EmbeddingMatrix build_matrix(const std::vector<std::vector<float>>& rows, const std::vector<std::int64_t>& ids) {
  EmbeddingMatrix m;
  m.dim = rows.front().size();
  m.row_ids = ids;
  for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
  return m;
}

std::vector<float> unit(std::vector<float> v) {
  double s = 0;
  for (const float x : v) s += static_cast<double>(x) * x;
  const double n = std::sqrt(s);
  for (auto& x : v) x = static_cast<float>(x / n);
  return v;
}

Outcome chunker() {
  Check c;
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = rng.uniform_index(4001);
    const std::size_t size = 1 + rng.uniform_index(trial % 2 ? 1600 : 60);
    const std::size_t overlap = rng.uniform_index(size);
    const auto text = testing::random_text(rng, len);
    const auto text32 = oracle::decode(text);
    const ChunkingParams p{size, overlap};
    const auto chunks = chunk_text(text, p);
    const auto windows = oracle::sliding_windows(text32.size(), size, overlap);
    const std::string where = " (len " + std::to_string(len) + ", size " + std::to_string(size) + ", overlap " +
                              std::to_string(overlap) + ")";
    c.expect(chunks.size() == oracle::sliding_window_count(text32.size(), size, overlap), "count" + where);
    c.expect(expected_chunk_count(text32.size(), p) == chunks.size(), "formula" + where);
    if (chunks.size() != windows.size()) continue;
    std::u32string rebuilt;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto piece = oracle::decode(chunks[i].raw_text);
      c.expect(chunks[i].char_start == windows[i].first && chunks[i].char_end == windows[i].second, "span" + where);
      c.expect(piece == text32.substr(windows[i].first, windows[i].second - windows[i].first), "content" + where);
      if (i > 0) {
        const auto prev = oracle::decode(chunks[i - 1].raw_text);
        const std::size_t shared = std::min(overlap, piece.size());
        c.expect(prev.size() == size, "short inner chunk" + where);
        c.expect(prev.substr(prev.size() - overlap, shared) == piece.substr(0, shared), "overlap" + where);
        rebuilt += piece.substr(std::min(overlap, piece.size()));
      } else {
        rebuilt = piece;
      }
    }
    c.expect(rebuilt == text32, "reconstruction" + where);
  }
  if (c.out.ok) c.out.detail = "1000 texts";
  return c.out;
}

Outcome retrieval() {
  Check c;
  Rng rng(202);
  const std::size_t n = 1000, dim = 1536;
  std::vector<std::vector<float>> rows;
  std::vector<std::int64_t> ids;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(testing::random_vector(rng, dim));
    ids.push_back(static_cast<std::int64_t>(n - i) * 7);
  }
  for (std::size_t i = 0; i + 1 < n; i += 9) rows[i + 1] = rows[i];  // exact ties under different ids
  const auto m = build_matrix(rows, ids);
  std::size_t compared = 0;
  for (int q = 0; q < 3; ++q) {
    const auto query = q == 0 ? rows[17] : testing::random_vector(rng, dim);
    for (const auto measure : {SimilarityMeasure::kCosine, SimilarityMeasure::kEuclidean, SimilarityMeasure::kDot}) {
      for (const std::size_t k : {std::size_t{1}, std::size_t{10}, std::size_t{100}}) {
        const auto expected = oracle::naive_rank(query, rows, ids, as_oracle(measure), k);
        const auto got = top_k(query, m, k, measure);
        c.expect(got.size() == expected.size(), "size");
        for (std::size_t r = 0; r < std::min(got.size(), expected.size()); ++r) {
          c.expect(got[r].row_id == expected[r].first && got[r].score == expected[r].second,
                   std::string(to_string(measure)) + " k=" + std::to_string(k) + " rank " + std::to_string(r + 1));
          ++compared;
        }
      }
    }
  }
  if (c.out.ok) c.out.detail = std::to_string(compared) + " ranked hits identical";
  return c.out;
}

Outcome unit_norm() {
  Check c;
  Rng rng(303);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 50 + rng.uniform_index(151), dim = 2 + rng.uniform_index(127);
    std::vector<std::vector<float>> rows;
    std::vector<std::int64_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(unit(testing::random_vector(rng, dim)));
      ids.push_back(static_cast<std::int64_t>(i));
    }
    const auto m = build_matrix(rows, ids);
    const auto q = unit(testing::random_vector(rng, dim));
    const auto cos = top_k(q, m, n, SimilarityMeasure::kCosine);
    const auto euc = top_k(q, m, n, SimilarityMeasure::kEuclidean);
    bool same = cos.size() == euc.size();
    for (std::size_t i = 0; same && i < cos.size(); ++i) same = cos[i].row_id == euc[i].row_id;
    c.expect(same, "instance " + std::to_string(inst));
  }
  if (c.out.ok) c.out.detail = "100 instances, identical order";
  return c.out;
}

Outcome classification() {
  Check c;
  const std::vector<std::vector<int>> counts = {{60, 2, 0, 0, 0, 1}, {16, 31, 10, 1, 0, 0}, {0, 0, 11, 0, 0, 0},
                                                {0, 1, 5, 16, 0, 1},  {0, 1, 0, 0, 10, 0},   {0, 2, 1, 0, 0, 2}};
  const std::vector<std::string> names = {"SA", "Mat", "Sca", "ML", "PR", "Other"};
  const double pr[] = {79, 84, 41, 94, 100, 50}, re[] = {95, 53, 100, 70, 91, 40}, ac[] = {89, 81, 91, 95, 99, 97};
  ConfusionMatrix m;
  m.categories = names;
  for (const auto& row : counts) m.counts.emplace_back(row.begin(), row.end());
  const auto metrics = all_metrics(m);
  double worst = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto o = oracle::one_vs_rest(counts, i);
    const auto& got = metrics[i];
    if (!got.precision || !got.recall || !got.accuracy) {
      c.fail(names[i] + " undefined");
      continue;
    }
    const double vals[3] = {*got.precision * 100, *got.recall * 100, *got.accuracy * 100};
    const double table[3] = {pr[i], re[i], ac[i]};
    const double ref[3] = {o.pr.value_or(-1) * 100, o.re.value_or(-1) * 100, o.ac.value_or(-1) * 100};
    for (int k = 0; k < 3; ++k) {
      worst = std::max(worst, std::abs(vals[k] - table[k]));
      c.expect(std::abs(vals[k] - table[k]) <= 0.5, names[i] + " off by " + std::to_string(vals[k] - table[k]));
      c.expect(std::abs(vals[k] - ref[k]) < 1e-9, names[i] + " disagrees with oracle");
    }
  }
  c.expect(m.total() == 171, "total");
  if (c.out.ok) c.out.detail = "largest deviation " + std::to_string(worst) + " points";
  return c.out;
}

std::vector<std::string> doc_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("d" + std::to_string(1000 + i));
  return out;
}

// Distinct unordered pairs, drawn without replacement.
std::vector<std::pair<std::size_t, std::size_t>> distinct_pairs(Rng& rng, std::size_t n, std::size_t want) {
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
  }
  rng.shuffle(all.begin(), all.end());
  all.resize(std::min(want, all.size()));
  return all;
}

ComparisonRecord record(const std::string& a, const std::string& b, const std::string& winner) {
  ComparisonRecord r;
  r.doc_a = a;
  r.doc_b = b;
  r.winner = winner;
  return r;
}

Outcome ranking() {
  Check c;
  // (a) consistent total orders
  std::size_t zero = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 500);
    const std::size_t n = 2 + rng.uniform_index(49);
    const auto docs = doc_names(n);
    std::vector<std::size_t> truth(n);
    std::iota(truth.begin(), truth.end(), 0);
    rng.shuffle(truth.begin(), truth.end());  // truth[i] = impact of docs[i]
    std::vector<ComparisonRecord> records;
    for (const auto& [i, j] : distinct_pairs(rng, n, 4 * n)) {
      records.push_back(record(docs[i], docs[j], truth[i] > truth[j] ? docs[i] : docs[j]));
    }
    SortOptions o;
    o.seed = seed;
    const auto s = sort_by_comparisons(records, docs, o);
    zero += s.misordered_count == 0 ? 1 : 0;
  }
  c.expect(zero == 20, "(a) " + std::to_string(zero) + "/20 consistent instances reached 0");

  // (b) the 3-cycle
  const std::vector<std::string> abc = {"A", "B", "C"};
  const std::vector<ComparisonRecord> cycle = {record("A", "B", "A"), record("B", "C", "B"), record("C", "A", "C")};
  const auto s3 = sort_by_comparisons(cycle, abc);
  c.expect(s3.misordered_count == 1 && std::abs(s3.misordered_fraction() - 1.0 / 3.0) < 1e-12,
           "(b) 3-cycle gave " + std::to_string(s3.misordered_fraction()));

  // (c) 10% of the records flipped
  std::size_t within = 0;
  double lo = 1, hi = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 900);
    const std::size_t n = 100;
    const auto docs = doc_names(n);
    std::vector<std::size_t> truth(n);
    std::iota(truth.begin(), truth.end(), 0);
    rng.shuffle(truth.begin(), truth.end());
    auto pairs = distinct_pairs(rng, n, 500);
    std::vector<ComparisonRecord> records;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs[p];
      const bool flip = p < pairs.size() / 10;  // pairs are already shuffled
      const bool i_wins = (truth[i] > truth[j]) != flip;
      records.push_back(record(docs[i], docs[j], i_wins ? docs[i] : docs[j]));
    }
    SortOptions o;
    o.seed = seed;
    const auto s = sort_by_comparisons(records, docs, o);
    const double f = s.misordered_fraction();
    lo = std::min(lo, f);
    hi = std::max(hi, f);
    within += f <= 0.13 ? 1 : 0;
  }
  c.expect(within >= 18, "(c) only " + std::to_string(within) + "/20 seeds at or below 13%");
  std::ostringstream d;
  d.precision(3);
  d << "(a) " << zero << "/20 at 0; (b) " << s3.misordered_count << "/3; (c) " << within
    << "/20 seeds <= 13%, range " << lo << ".." << hi;
  if (c.out.ok) c.out.detail = d.str();
  return c.out;
}

Outcome prompt_budget() {
  Check c;
  Rng rng(606);
  const PromptBudget budget;
  std::size_t max_len = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<PromptCandidate> hits;
    const std::size_t count = rng.uniform_index(31);
    for (std::size_t i = 0; i < count; ++i) {
      PromptCandidate h;
      h.chunk_id = static_cast<ChunkId>(i + 1);
      h.score = 1.0 - 0.01 * static_cast<double>(i);
      h.text = testing::random_text(rng, rng.uniform_index(trial % 3 == 0 ? 13000 : 2000));
      hits.push_back(std::move(h));
    }
    PromptOptions o;
    o.instruction = testing::random_text(rng, 1 + rng.uniform_index(400));
    const auto query = testing::random_text(rng, 1 + rng.uniform_index(300));
    const auto p = assemble_prompt(query, hits, o);
    const auto len = oracle::decode(p.rendered).size();
    max_len = std::max(max_len, len);
    c.expect(len == p.char_count, "char_count mismatch");
    c.expect(len + budget.response_reserve_chars <= budget.total_chars,
             "trial " + std::to_string(trial) + " rendered " + std::to_string(len));
  }
  c.expect(estimate_tokens(std::string(16384, 'x')) == 4096, "estimate_tokens(16384 chars)");
  if (c.out.ok) c.out.detail = "longest prompt " + std::to_string(max_len) + " of 12820 available";
  return c.out;
}

Outcome vector_cache() {
  Check c;
  testing::TempDir dir;
  const std::size_t n = 10000, dim = 1536;
  Rng rng(707);
  std::vector<float> data(n * dim);
  for (auto& x : data) x = static_cast<float>(rng.normal());
  data[0] = -0.0f;
  data[1] = std::numeric_limits<float>::denorm_min();
  data[2] = std::numeric_limits<float>::max();
  const auto path = dir / "big.vecs";
  write_vector_block(path, "text-embedding-ada-002", dim, data);
  const auto block = read_vector_block(path);
  c.expect(block.header.count == n && block.header.dim == dim, "header");
  c.expect(block.header.model_id == "text-embedding-ada-002", "model id");
  c.expect(block.data.size() == data.size() &&
               std::memcmp(block.data.data(), data.data(), data.size() * sizeof(float)) == 0,
           "payload not bit-exact");

  const auto bytes = testing::slurp(path);
  const auto rejected = [&](const std::string& name, const std::string& content) {
    const auto p = dir / name;
    testing::spit(p, content);
    try {
      read_vector_block(p);
      c.fail(name + " accepted");
    } catch (const Error&) {
    }
  };
  rejected("truncated.vecs", bytes.substr(0, bytes.size() - 3));
  rejected("header_only.vecs", bytes.substr(0, 20));
  rejected("trailing.vecs", bytes + "x");
  auto magic = bytes;
  magic[0] = 'X';
  rejected("magic.vecs", magic);
  auto version = bytes;
  version[8] = 9;
  rejected("version.vecs", version);
  auto count = bytes;
  count[16] ^= 0x01;
  rejected("count.vecs", count);
  rejected("empty.vecs", "");
  if (c.out.ok) c.out.detail = std::to_string(bytes.size()) + " bytes round-tripped; 7 corruptions rejected";
  return c.out;
}

Outcome tsne() {
  Check c;
  const std::size_t n = 200, dim = 10;
  double min_purity = 1, worst_perp = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 808);
    std::vector<double> x(n * dim);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = i % 2;
      for (std::size_t d = 0; d < dim; ++d) x[i * dim + d] = rng.normal() + (labels[i] ? 4.0 : 0.0);
    }
    TsneOptions o;
    o.perplexity = 40;
    o.iterations = 1000;
    o.seed = seed;
    const auto r = tsne_project(x, n, dim, o);
    const double purity = oracle::knn_purity(r.coords, labels, 5);
    min_purity = std::min(min_purity, purity);
    c.expect(purity >= 0.95, "seed " + std::to_string(seed) + " purity " + std::to_string(purity));
    for (const double p : r.achieved_perplexity) worst_perp = std::max(worst_perp, std::abs(p - 40.0));
  }
  c.expect(worst_perp <= 1e-3, "perplexity off by " + std::to_string(worst_perp));
  std::ostringstream d;
  d << "min 5-NN purity " << min_purity << ", max perplexity error " << worst_perp;
  if (c.out.ok) c.out.detail = d.str();
  return c.out;
}

std::string paragraph(Rng& rng, std::size_t scalars) {
  static const char* pool[] = {"scattering", "lattice", "film", "electrolyte", "peak", "beamline", "sample", "fit"};
  std::string out;
  while (out.size() < scalars) {
    if (!out.empty()) out += ' ';
    out += pool[rng.uniform_index(std::size(pool))];
  }
  return out;
}

struct PipelineRun {
  std::vector<ProvenanceEntry> provenance;
  std::string response;
  ChunkId target = 0;
};

PipelineRun mock_pipeline() {
  auto store = open_sqlite_store(":memory:");
  MatrixCache matrices(*store);
  MockTextEmbedder embedder(1536);
  StubChatProvider llm(stubs::count_chunks(), "stub-count");
  Rng rng(909);
  const std::vector<std::pair<std::string, std::pair<std::string, std::string>>> papers = {
      {"Grazing incidence scattering of block copolymer films", {"Ada", "Okafor"}},
      {"Operando diffraction of layered cathodes", {"Bo", "Lindqvist"}},
      {"Autonomous beamline alignment", {"Chen", "Wu"}}};
  for (const auto& [title, author] : papers) {
    const auto xml = testing::make_tei(title, {author}, {paragraph(rng, 2500), paragraph(rng, 1800)});
    ingest_tei(xml, title + ".xml", *store, embedder);
  }
  const auto raw = matrices.chunks(ChunkKind::kRaw, embedder.model_id());
  PipelineRun run;
  const std::size_t pick = raw->rows() / 2;
  run.target = raw->row_ids[pick];
  const auto base = raw->row(pick);
  std::vector<float> planted(base.begin(), base.end());
  for (auto& v : planted) v += static_cast<float>(0.001 * rng.normal());
  const std::string query = "Which sample showed the sharpest peak?";
  embedder.plant(query, planted);
  ChatEngineConfig config;
  config.retry = RetryPolicy::immediate(1);
  ChatEngine engine(*store, matrices, embedder, llm, config);
  const auto answer = engine.answer_query(query);
  run.provenance = answer.provenance;
  run.response = answer.response_text;
  return run;
}

Outcome end_to_end() {
  Check c;
  const auto a = mock_pipeline();
  const auto b = mock_pipeline();
  c.expect(!a.provenance.empty() && a.provenance.front().chunk_id == a.target, "planted chunk not ranked first");
  c.expect(a.response == std::to_string(a.provenance.size()), "stub answer " + a.response);
  c.expect(a.provenance == b.provenance && a.response == b.response && a.target == b.target, "not deterministic");
  if (c.out.ok) {
    c.out.detail = "planted chunk first of " + std::to_string(a.provenance.size()) + "; repeat run identical";
  }
  return c.out;
}

Outcome summary_corpus() {
  Check c;
  Rng rng(1010);
  StubChatProvider llm(stubs::echo_prefix(100), "stub-echo");
  SummarizerOptions o;
  o.retry = RetryPolicy::immediate(1);
  std::size_t raw_total = 0, summary_total = 0;
  for (int d = 0; d < 12; ++d) {
    DocumentRecord doc;
    doc.doc_id = "doc" + std::to_string(d);
    doc.title = "Paper " + std::to_string(d);
    doc.display_name = "Author " + std::to_string(d);
    doc.body_text = paragraph(rng, 500 + rng.uniform_index(40000));
    const auto len = oracle::decode(doc.body_text).size();
    const auto raw = chunk_document(doc, ChunkingParams{});
    c.expect(raw.size() == oracle::sliding_window_count(len, 1400, 280), doc.doc_id + " raw count");
    const auto corpus = build_summary_corpus(doc, raw, llm, o);
    const auto slen = oracle::decode(corpus.summary_document).size();
    c.expect(corpus.chunks.size() == oracle::sliding_window_count(slen, 1400, 280), doc.doc_id + " summary count");
    c.expect(corpus.raw_chunks == raw.size() && corpus.failures.empty(), doc.doc_id + " bookkeeping");
    raw_total += raw.size();
    summary_total += corpus.chunks.size();
  }
  std::ostringstream d;
  d.precision(4);
  d << "raw " << raw_total << ", summary " << summary_total << ", compression ratio "
    << compression_ratio(summary_total, raw_total) << " (707/6157 gives " << compression_ratio(707, 6157) << ")";
  c.out.detail = d.str() + (c.out.detail.empty() ? "" : "; " + c.out.detail);
  return c.out;
}

}  // namespace

int main() {
  criterion(1, "chunker invariants and count formula", 10, chunker);
  criterion(2, "top-k equals naive oracle, 1000 x 1536, all measures", 5, retrieval);
  criterion(3, "unit vectors: cosine order equals euclidean order", 5, unit_norm);
  criterion(4, "classification metrics match the reported table", 1, classification);
  criterion(5, "misordered-pair sort", 60, ranking);
  criterion(6, "prompt fits the context budget", 5, prompt_budget);
  criterion(7, "vector cache round trip and corruption", 5, vector_cache);
  criterion(8, "t-SNE separates two clusters", 180, tsne);
  criterion(9, "end-to-end mock pipeline", 5, end_to_end);
  criterion(10, "summary corpus counts and compression ratio", 60, summary_corpus);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
