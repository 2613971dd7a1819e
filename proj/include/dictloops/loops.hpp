#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "dictloops/graph.hpp"
#include "dictloops/parallel.hpp"
#include "dictloops/random.hpp"

namespace dictloops {

/// Girth value for an edge on no cycle (or none within the probe cap).
inline constexpr std::uint32_t no_cycle = std::numeric_limits<std::uint32_t>::max();

/// Per-edge length of the shortest directed cycle through that edge.
struct EdgeGirthMap {
  std::vector<Edge> edges;            // sorted
  std::vector<std::uint32_t> girth;   // parallel to edges; no_cycle if none found
  std::optional<std::size_t> max_probe_depth;

  std::uint32_t of(NodeId u, NodeId v) const {
    const auto it = std::lower_bound(edges.begin(), edges.end(), Edge{u, v});
    if (it == edges.end() || *it != Edge{u, v}) throw GraphError("edge not in girth map");
    return girth[static_cast<std::size_t>(it - edges.begin())];
  }
};

struct GirthOptions {
  std::optional<std::vector<NodeId>> scope{};    // induced subgraph; whole graph if unset
  std::optional<std::size_t> max_probe_depth{};  // >= 2; unbounded if unset
};

/// girth(u, v) = 1 + dist(v, u). Rather than one forward BFS per edge, one
/// backward BFS from each tail u resolves all of u's out-edges at once.
inline EdgeGirthMap edge_girth(const DictGraph& g, const GirthOptions& opt = {}) {
  const std::size_t n = g.node_count();
  if (opt.max_probe_depth && *opt.max_probe_depth < 2) throw Error("max_probe_depth must be >= 2");
  std::vector<bool> in_scope(n, !opt.scope);
  std::vector<NodeId> tails;
  if (opt.scope) {
    for (NodeId u : *opt.scope) in_scope.at(u) = true;
  }
  for (NodeId u = 0; u < n; ++u)
    if (in_scope[u]) tails.push_back(u);

  // dist(x, u) is only needed up to cap - 1
  const std::size_t max_dist = opt.max_probe_depth ? *opt.max_probe_depth - 1 : n;

  std::vector<std::vector<std::uint32_t>> per_tail(tails.size());
  parallel_for(tails.size(), [&](std::size_t i) {
    const NodeId u = tails[i];
    std::vector<NodeId> heads;
    for (NodeId v : g.out(u))
      if (in_scope[v]) heads.push_back(v);
    auto& out = per_tail[i];
    out.assign(heads.size(), no_cycle);
    if (heads.empty()) return;

    thread_local std::vector<std::uint32_t> dist;
    thread_local std::vector<NodeId> touched;
    if (dist.size() < n) dist.assign(n, no_cycle);
    touched.clear();

    std::size_t unresolved = heads.size();
    std::vector<NodeId> frontier{u}, next;
    dist[u] = 0;
    touched.push_back(u);
    for (std::uint32_t d = 1; d <= max_dist && !frontier.empty() && unresolved > 0; ++d) {
      next.clear();
      for (NodeId x : frontier)
        for (NodeId w : g.in(x)) {
          if (!in_scope[w] || dist[w] != no_cycle) continue;
          dist[w] = d;
          touched.push_back(w);
          next.push_back(w);
          if (g.has_edge(u, w)) --unresolved;
        }
      frontier.swap(next);
    }
    for (std::size_t h = 0; h < heads.size(); ++h)
      if (dist[heads[h]] != no_cycle) out[h] = dist[heads[h]] + 1;
    for (NodeId t : touched) dist[t] = no_cycle;
  });

  EdgeGirthMap map;
  map.max_probe_depth = opt.max_probe_depth;
  for (std::size_t i = 0; i < tails.size(); ++i) {
    std::size_t h = 0;
    for (NodeId v : g.out(tails[i]))
      if (in_scope[v]) {
        map.edges.push_back({tails[i], v});
        map.girth.push_back(per_tail[i][h++]);
      }
  }
  return map;
}

struct LoopHistogram {
  std::map<std::uint32_t, std::size_t> counts;  // girth -> edges
  std::size_t acyclic_edges = 0;                // on no cycle (or beyond the cap)
  bool capped = false;                          // a probe cap may hide longer loops

  std::size_t total() const {
    std::size_t t = acyclic_edges;
    for (const auto& [len, c] : counts) t += c;
    return t;
  }
  std::size_t at_most(std::uint32_t len) const {
    std::size_t t = 0;
    for (const auto& [l, c] : counts)
      if (l <= len) t += c;
    return t;
  }
};

inline LoopHistogram loop_histogram(const EdgeGirthMap& girths) {
  LoopHistogram h;
  h.capped = girths.max_probe_depth.has_value();
  for (auto len : girths.girth) {
    if (len == no_cycle) ++h.acyclic_edges;
    else ++h.counts[len];
  }
  return h;
}

/// Nodes lying on at least one directed cycle.
inline std::vector<NodeId> nodes_in_loops(const DictGraph& g) {
  std::vector<NodeId> result;
  for (const auto& comp : scc(g).components)
    if (comp.size() >= 2) result.insert(result.end(), comp.begin(), comp.end());
  std::sort(result.begin(), result.end());
  return result;
}

struct RandomizeOptions {
  std::size_t swap_factor = 10;
  std::uint64_t seed = 0;
  std::size_t max_attempts_factor = 100;
};

struct RandomizeResult {
  DictGraph graph;
  std::size_t target_swaps = 0;
  std::size_t swaps = 0;
  std::size_t attempts = 0;
  bool exhausted = false;
  std::string warning;
};

/// Degree-preserving null model by directed double-edge swaps:
/// (a->b), (c->d) becomes (a->d), (c->b) unless that would create a
/// self-loop or a duplicate edge.
inline RandomizeResult randomize_degree_preserving(const DictGraph& g, const RandomizeOptions& opt = {}) {
  if (g.edge_count() < 2) throw Error("randomization needs at least 2 edges");
  RandomizeResult result;
  std::vector<Edge> edges = g.edges();
  const auto key = [](NodeId a, NodeId b) { return (std::uint64_t{a} << 32) | b; };
  std::unordered_set<std::uint64_t> present;
  present.reserve(edges.size() * 2);
  for (const Edge& e : edges) present.insert(key(e.src, e.dst));

  result.target_swaps = opt.swap_factor * edges.size();
  const std::size_t budget = opt.max_attempts_factor * std::max<std::size_t>(result.target_swaps, 1);
  Rng rng(opt.seed);
  const auto m = static_cast<std::uint64_t>(edges.size());
  while (result.swaps < result.target_swaps && result.attempts < budget) {
    ++result.attempts;
    const auto i = static_cast<std::size_t>(rng.below(m));
    const auto j = static_cast<std::size_t>(rng.below(m));
    if (i == j) continue;
    const NodeId a = edges[i].src, b = edges[i].dst;
    const NodeId c = edges[j].src, d = edges[j].dst;
    if (a == d || c == b) continue;
    if (present.contains(key(a, d)) || present.contains(key(c, b))) continue;
    present.erase(key(a, b));
    present.erase(key(c, d));
    present.insert(key(a, d));
    present.insert(key(c, b));
    edges[i].dst = d;
    edges[j].dst = b;
    ++result.swaps;
  }
  if (result.swaps < result.target_swaps) {
    result.exhausted = true;
    result.warning = "attempt budget exhausted after " + std::to_string(result.attempts) + " attempts: " +
                     std::to_string(result.swaps) + " of " + std::to_string(result.target_swaps) +
                     " swaps performed";
  }
  result.graph = g.with_edges(std::move(edges));
  return result;
}

}  // namespace dictloops
