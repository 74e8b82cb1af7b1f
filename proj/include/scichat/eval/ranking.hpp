#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scichat/store/records.hpp"

namespace scichat {

using DocPair = std::pair<std::string, std::string>;

// Every document appears in at least one pair; no self-pairs and no repeated
// unordered pairs. Presentation order within a pair is randomized.
// Throws Error(kInvalidArgument) for fewer than 2 documents, duplicate ids, or
// n_pairs outside [ceil(n/2), n(n-1)/2].
std::vector<DocPair> sample_pairs(std::span<const std::string> doc_ids, std::size_t n_pairs,
                                  std::uint64_t seed);

struct RankingState {
  std::vector<std::string> ordering;  // lowest to highest
  std::size_t misordered_count = 0;
  std::size_t initial_misordered = 0;
  std::size_t passes = 0;
  std::size_t strict_swaps = 0;
  std::size_t plateau_swaps = 0;
  std::size_t insertions = 0;  // strict single-document moves
  std::vector<ComparisonRecord> records;

  double misordered_fraction() const {
    return records.empty() ? 0.0
                           : static_cast<double>(misordered_count) / static_cast<double>(records.size());
  }
};

// Records whose winner sits below its loser in `ordering`.
// Throws Error(kInvalidArgument) if a record names a document not in ordering.
std::size_t count_misordered(std::span<const ComparisonRecord> records,
                             std::span<const std::string> ordering);

struct SortOptions {
  std::uint64_t seed = 0;
  std::size_t max_passes = 1000;
  // Equal-count swaps accepted per pass; 0 means one per document.
  std::size_t plateau_cap = 0;
  // Consecutive passes without a strict improvement before giving up.
  std::size_t patience = 20;
};

// Local search from a seeded random order. Each pass visits, in seeded random
// order, every adjacent position pair and every record that is currently
// misordered, swapping the two documents when that lowers the misordered count
// (or keeps it equal while the plateau budget lasts). A misordered record whose
// swap does not help may instead move one endpoint next to the other, and each
// document is also tried at its best position; those moves are taken only when
// they strictly lower the count. Stops at zero, after `patience` passes in a row
// without a strict improvement, or after max_passes.
RankingState sort_by_comparisons(std::span<const ComparisonRecord> records,
                                 std::span<const std::string> doc_ids, const SortOptions& options = {});

// Directed cycles of the winner -> loser graph: one simple cycle per strongly
// connected component with more than one document, starting at its smallest id.
// Empty exactly when the records are acyclic.
std::vector<std::vector<std::string>> find_cycles(std::span<const ComparisonRecord> records);

}  // namespace scichat
