#include "scichat/eval/ranking.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "scichat/common/error.hpp"
#include "scichat/common/rng.hpp"

namespace scichat {
namespace {

std::unordered_map<std::string, std::size_t> index_of(std::span<const std::string> ids) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate document id " + ids[i]);
    }
  }
  return index;
}

struct Edge {
  std::size_t winner;
  std::size_t loser;
};

std::vector<Edge> resolve(std::span<const ComparisonRecord> records,
                          const std::unordered_map<std::string, std::size_t>& index) {
  std::vector<Edge> edges;
  edges.reserve(records.size());
  for (const auto& r : records) {
    if (r.doc_a == r.doc_b || (r.winner != r.doc_a && r.winner != r.doc_b)) {
      throw Error(ErrorCode::kInvalidArgument, "malformed comparison " + r.doc_a + " vs " + r.doc_b);
    }
    const auto w = index.find(r.winner);
    const auto l = index.find(r.loser());
    if (w == index.end() || l == index.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "comparison references unknown document " + (w == index.end() ? r.winner : r.loser()));
    }
    edges.push_back({w->second, l->second});
  }
  return edges;
}

}  // namespace

std::vector<DocPair> sample_pairs(std::span<const std::string> doc_ids, std::size_t n_pairs,
                                  std::uint64_t seed) {
  const std::size_t n = doc_ids.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "pair sampling needs at least 2 documents");
  index_of(doc_ids);
  const std::size_t minimum = (n + 1) / 2;
  const std::size_t maximum = n * (n - 1) / 2;
  if (n_pairs < minimum || n_pairs > maximum) {
    throw Error(ErrorCode::kInvalidArgument, std::to_string(n_pairs) + " pairs cannot cover " +
                                                 std::to_string(n) + " documents (need " +
                                                 std::to_string(minimum) + " to " +
                                                 std::to_string(maximum) + ")");
  }

  Rng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  std::vector<std::pair<std::size_t, std::size_t>> order;
  const auto add = [&](std::size_t a, std::size_t b) {
    if (!chosen.emplace(std::min(a, b), std::max(a, b)).second) return false;
    order.emplace_back(a, b);
    return true;
  };

  // Coverage first: pair up a random permutation.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm.begin(), perm.end());
  for (std::size_t i = 0; i + 1 < n; i += 2) add(perm[i], perm[i + 1]);
  if (n % 2 == 1) {
    const auto other = perm[rng.uniform_index(n - 1)];
    add(perm[n - 1], other);
  }

  if (order.size() < n_pairs) {
    if (2 * n_pairs > maximum) {
      std::vector<std::pair<std::size_t, std::size_t>> rest;
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          if (!chosen.contains({a, b})) rest.emplace_back(a, b);
        }
      }
      rng.shuffle(rest.begin(), rest.end());
      for (std::size_t i = 0; order.size() < n_pairs; ++i) add(rest[i].first, rest[i].second);
    } else {
      while (order.size() < n_pairs) {
        const auto a = rng.uniform_index(n);
        const auto b = rng.uniform_index(n);
        if (a != b) add(a, b);
      }
    }
  }

  std::vector<DocPair> pairs;
  pairs.reserve(order.size());
  for (auto [a, b] : order) {
    if (rng.uniform_index(2) == 1) std::swap(a, b);
    pairs.emplace_back(doc_ids[a], doc_ids[b]);
  }
  return pairs;
}

std::size_t count_misordered(std::span<const ComparisonRecord> records,
                             std::span<const std::string> ordering) {
  const auto index = index_of(ordering);
  std::size_t count = 0;
  for (const auto& e : resolve(records, index)) count += e.winner < e.loser ? 1 : 0;
  return count;
}

RankingState sort_by_comparisons(std::span<const ComparisonRecord> records,
                                 std::span<const std::string> doc_ids, const SortOptions& options) {
  const std::size_t n = doc_ids.size();
  const auto index = index_of(doc_ids);
  const auto edges = resolve(records, index);

  RankingState state;
  state.records.assign(records.begin(), records.end());

  std::vector<std::vector<std::size_t>> touching(n);
  for (std::size_t r = 0; r < edges.size(); ++r) {
    touching[edges[r].winner].push_back(r);
    touching[edges[r].loser].push_back(r);
  }

  Rng rng(options.seed);
  std::vector<std::size_t> order(n);  // position -> doc
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<std::size_t> pos(n);  // doc -> position
  for (std::size_t p = 0; p < n; ++p) pos[order[p]] = p;

  const auto misordered = [&](const Edge& e) { return pos[e.winner] < pos[e.loser]; };
  std::size_t count = 0;
  for (const auto& e : edges) count += misordered(e) ? 1 : 0;
  state.initial_misordered = count;

  // Change in misordered count if documents u and v traded positions.
  const auto swap_delta = [&](std::size_t u, std::size_t v) {
    const auto position_after = [&](std::size_t d) {
      return d == u ? pos[v] : d == v ? pos[u] : pos[d];
    };
    long delta = 0;
    const auto visit = [&](std::size_t r, bool skip_shared) {
      const auto& e = edges[r];
      if (skip_shared && (e.winner == u || e.loser == u)) return;
      const bool before = pos[e.winner] < pos[e.loser];
      const bool after = position_after(e.winner) < position_after(e.loser);
      delta += static_cast<long>(after) - static_cast<long>(before);
    };
    for (const auto r : touching[u]) visit(r, false);
    for (const auto r : touching[v]) visit(r, true);
    return delta;
  };
  const auto do_swap = [&](std::size_t u, std::size_t v) {
    std::swap(order[pos[u]], order[pos[v]]);
    std::swap(pos[u], pos[v]);
  };

  // Change in misordered count if document d moved to position `to`, the
  // documents in between shifting by one. Their relative order is unchanged.
  const auto move_delta = [&](std::size_t d, std::size_t to) {
    const std::size_t from = pos[d];
    const std::size_t lo = std::min(from, to);
    const std::size_t hi = std::max(from, to);
    long delta = 0;
    for (const auto r : touching[d]) {
      const auto& e = edges[r];
      const auto other = e.winner == d ? e.loser : e.winner;
      if (other == d || pos[other] < lo || pos[other] > hi) continue;
      const bool before = misordered(e);
      const bool d_after_above = to > from;
      const bool after = e.winner == d ? !d_after_above : d_after_above;
      delta += static_cast<long>(after) - static_cast<long>(before);
    }
    return delta;
  };
  const auto do_move = [&](std::size_t d, std::size_t to) {
    const std::size_t from = pos[d];
    if (from < to) {
      std::rotate(order.begin() + static_cast<std::ptrdiff_t>(from),
                  order.begin() + static_cast<std::ptrdiff_t>(from + 1),
                  order.begin() + static_cast<std::ptrdiff_t>(to + 1));
    } else {
      std::rotate(order.begin() + static_cast<std::ptrdiff_t>(to),
                  order.begin() + static_cast<std::ptrdiff_t>(from),
                  order.begin() + static_cast<std::ptrdiff_t>(from + 1));
    }
    for (std::size_t p = std::min(from, to); p <= std::max(from, to); ++p) pos[order[p]] = p;
  };

  // Best target position for d with everything else fixed; returns (delta, to).
  std::vector<long> above_gain(n + 1);
  const auto best_move = [&](std::size_t d) {
    // Slot s puts d above the s lowest of the other documents.
    std::fill(above_gain.begin(), above_gain.end(), 0);
    long cost_at_zero = 0;
    for (const auto r : touching[d]) {
      const auto& e = edges[r];
      const auto other = e.winner == d ? e.loser : e.winner;
      if (other == d) continue;
      const auto q = pos[other] > pos[d] ? pos[other] - 1 : pos[other];
      // Below everything d loses nothing as a loser and is misordered as a winner.
      if (e.winner == d) {
        ++cost_at_zero;
        --above_gain[q + 1];
      } else {
        ++above_gain[q + 1];
      }
    }
    long cost = cost_at_zero;
    long best_cost = cost;
    std::size_t best_slot = 0;
    long current_cost = cost;
    for (std::size_t slot = 0; slot < n; ++slot) {
      if (slot > 0) cost += above_gain[slot];
      if (slot == pos[d]) current_cost = cost;
      if (cost < best_cost) {
        best_cost = cost;
        best_slot = slot;
      }
    }
    return std::pair<long, std::size_t>{best_cost - current_cost, best_slot};
  };

  const std::size_t plateau_cap = options.plateau_cap == 0 ? n : options.plateau_cap;
  // Candidates: [0, n-1) are adjacent position pairs, then records, then
  // one entry per document for a best-position move.
  const std::size_t first_doc = n > 0 ? n - 1 + edges.size() : 0;
  std::vector<std::size_t> candidates(n > 0 ? first_doc + n : 0);
  std::iota(candidates.begin(), candidates.end(), 0);

  std::size_t idle = 0;
  while (state.passes < options.max_passes && count > 0) {
    ++state.passes;
    rng.shuffle(candidates.begin(), candidates.end());
    std::size_t strict = 0;
    std::size_t plateau = 0;
    for (const auto c : candidates) {
      std::size_t u = 0;
      std::size_t v = 0;
      if (c >= first_doc) {
        const auto d = c - first_doc;
        const auto [delta, to] = best_move(d);
        if (delta < 0) {
          do_move(d, to);
          count -= static_cast<std::size_t>(-delta);
          ++state.insertions;
          ++strict;
        }
        continue;
      }
      if (c + 1 < n) {
        u = order[c];
        v = order[c + 1];
      } else {
        const auto& e = edges[c - (n - 1)];
        if (!misordered(e)) continue;
        u = e.winner;
        v = e.loser;
      }
      const long delta = swap_delta(u, v);
      if (delta < 0) {
        do_swap(u, v);
        count -= static_cast<std::size_t>(-delta);
        ++strict;
        continue;
      }
      if (c + 1 >= n) {
        // Misordered record: also try lifting the winner just above the
        // loser, or dropping the loser just below the winner.
        const auto up = move_delta(u, pos[v]);
        const auto down = move_delta(v, pos[u]);
        if (std::min(up, down) < 0) {
          if (up <= down) {
            do_move(u, pos[v]);
          } else {
            do_move(v, pos[u]);
          }
          count -= static_cast<std::size_t>(-std::min(up, down));
          ++state.insertions;
          ++strict;
          continue;
        }
      }
      if (delta == 0 && plateau < plateau_cap) {
        do_swap(u, v);
        ++plateau;
      }
    }
    state.strict_swaps += strict;
    state.plateau_swaps += plateau;
    idle = strict > 0 ? 0 : idle + 1;
    if (idle >= std::max<std::size_t>(options.patience, 1) || (strict == 0 && plateau == 0)) break;
  }

  state.misordered_count = count;
  state.ordering.reserve(n);
  for (const auto d : order) state.ordering.push_back(doc_ids[d]);
  return state;
}

std::vector<std::vector<std::string>> find_cycles(std::span<const ComparisonRecord> records) {
  std::set<std::string> names;
  for (const auto& r : records) {
    names.insert(r.doc_a);
    names.insert(r.doc_b);
  }
  const std::vector<std::string> ids(names.begin(), names.end());
  const auto index = index_of(ids);
  const auto edges = resolve(records, index);
  const std::size_t n = ids.size();

  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : edges) adj[e.winner].push_back(e.loser);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  // Iterative Tarjan.
  constexpr std::size_t kUnvisited = SIZE_MAX;
  std::vector<std::size_t> low(n, 0);
  std::vector<std::size_t> disc(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> component(n, kUnvisited);
  std::size_t components = 0;
  std::size_t time = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != kUnvisited) continue;
    std::vector<std::pair<std::size_t, std::size_t>> frames{{root, 0}};
    disc[root] = low[root] = time++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [node, next] = frames.back();
      if (next < adj[node].size()) {
        const auto child = adj[node][next++];
        if (disc[child] == kUnvisited) {
          disc[child] = low[child] = time++;
          stack.push_back(child);
          on_stack[child] = true;
          frames.emplace_back(child, 0);
        } else if (on_stack[child]) {
          low[node] = std::min(low[node], disc[child]);
        }
        continue;
      }
      const auto done = node;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == disc[done]) {
        std::size_t member = 0;
        do {
          member = stack.back();
          stack.pop_back();
          on_stack[member] = false;
          component[member] = components;
        } while (member != done);
        ++components;
      }
    }
  }

  std::vector<std::vector<std::size_t>> members(components);
  for (std::size_t v = 0; v < n; ++v) members[component[v]].push_back(v);

  std::vector<std::vector<std::string>> cycles;
  for (const auto& group : members) {
    if (group.size() < 2) continue;
    const auto start = *std::min_element(group.begin(), group.end());
    const auto comp = component[start];
    // Shortest path start -> ... -> start inside the component.
    std::vector<std::size_t> parent(n, kUnvisited);
    std::deque<std::size_t> queue{start};
    std::size_t closing = kUnvisited;
    while (!queue.empty() && closing == kUnvisited) {
      const auto node = queue.front();
      queue.pop_front();
      for (const auto next : adj[node]) {
        if (component[next] != comp) continue;
        if (next == start) {
          closing = node;
          break;
        }
        if (parent[next] == kUnvisited) {
          parent[next] = node;
          queue.push_back(next);
        }
      }
    }
    std::vector<std::string> cycle;
    for (auto node = closing; node != start; node = parent[node]) cycle.push_back(ids[node]);
    cycle.push_back(ids[start]);
    std::reverse(cycle.begin(), cycle.end());
    cycles.push_back(std::move(cycle));
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

}  // namespace scichat
