#pragma once

// Brute-force reference implementations used only by the tests. None of
// these share code paths with the library algorithms they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "dictloops/graph.hpp"
#include "dictloops/random.hpp"

namespace oracle {

using dictloops::Edge;
using dictloops::NodeId;
using BoolMatrix = std::vector<std::vector<bool>>;

/// Simple digraph on n nodes; each ordered pair (u != v) is an edge with
/// probability `density`.
inline std::vector<Edge> random_digraph(std::size_t n, double density, dictloops::Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && rng.unit() < density) edges.push_back({u, v});
  return edges;
}

inline dictloops::DictGraph make_graph(std::size_t n, const std::vector<Edge>& edges) {
  return dictloops::build_graph(dictloops::anonymous_nodes(n), edges).graph;
}

inline BoolMatrix adjacency(std::size_t n, const std::vector<Edge>& edges) {
  BoolMatrix a(n, std::vector<bool>(n, false));
  for (const auto& e : edges) a[e.src][e.dst] = true;
  return a;
}

/// reach[u][v]: a path of length >= 1 from u to v, by summing boolean
/// matrix powers A + A^2 + ... + A^n.
inline BoolMatrix closure_by_powering(std::size_t n, const std::vector<Edge>& edges) {
  const auto a = adjacency(n, edges);
  BoolMatrix power = a, reach = a;
  for (std::size_t step = 2; step <= n; ++step) {
    BoolMatrix next(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (power[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (a[k][j]) next[i][j] = true;
    power = std::move(next);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (power[i][j]) reach[i][j] = true;
  }
  return reach;
}

/// Equivalence classes of mutual reachability (every node reaches itself).
inline std::set<std::set<NodeId>> mutual_reachability_classes(std::size_t n, const std::vector<Edge>& edges) {
  const auto reach = closure_by_powering(n, edges);
  std::set<std::set<NodeId>> classes;
  for (NodeId u = 0; u < n; ++u) {
    std::set<NodeId> cls{u};
    for (NodeId v = 0; v < n; ++v)
      if (u != v && reach[u][v] && reach[v][u]) cls.insert(v);
    classes.insert(cls);
  }
  return classes;
}

/// All-pairs shortest path lengths (Floyd-Warshall); inf where unreachable.
inline std::vector<std::vector<std::uint32_t>> all_pairs_shortest(std::size_t n, const std::vector<Edge>& edges) {
  constexpr std::uint32_t inf = std::numeric_limits<std::uint32_t>::max() / 4;
  std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : edges) d[e.src][e.dst] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

/// Johnson's algorithm: calls `emit` with the vertex sequence of every
/// elementary cycle exactly once.
inline void johnson_cycles(std::size_t n, const std::vector<Edge>& edges,
                           const std::function<void(const std::vector<NodeId>&)>& emit) {
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& e : edges) adj[e.src].push_back(e.dst);
  std::vector<bool> blocked(n), in_comp(n);
  std::vector<std::set<NodeId>> b(n);
  std::vector<NodeId> stack;

  std::function<void(NodeId)> unblock = [&](NodeId u) {
    blocked[u] = false;
    while (!b[u].empty()) {
      const NodeId w = *b[u].begin();
      b[u].erase(b[u].begin());
      if (blocked[w]) unblock(w);
    }
  };
  NodeId s = 0;
  std::function<bool(NodeId)> circuit = [&](NodeId v) {
    bool found = false;
    stack.push_back(v);
    blocked[v] = true;
    for (NodeId w : adj[v]) {
      if (!in_comp[w]) continue;
      if (w == s) {
        emit(stack);
        found = true;
      } else if (!blocked[w] && circuit(w)) {
        found = true;
      }
    }
    if (found) unblock(v);
    else
      for (NodeId w : adj[v])
        if (in_comp[w]) b[w].insert(v);
    stack.pop_back();
    return found;
  };

  for (s = 0; s < n; ++s) {
    // strong component of s in the subgraph induced by {s, ..., n-1}
    std::vector<bool> fwd(n, false), bwd(n, false);
    std::vector<NodeId> work{s};
    fwd[s] = true;
    while (!work.empty()) {
      const NodeId u = work.back();
      work.pop_back();
      for (NodeId v : adj[u])
        if (v >= s && !fwd[v]) fwd[v] = true, work.push_back(v);
    }
    work = {s};
    bwd[s] = true;
    while (!work.empty()) {
      const NodeId u = work.back();
      work.pop_back();
      for (const auto& e : edges)
        if (e.dst == u && e.src >= s && !bwd[e.src]) bwd[e.src] = true, work.push_back(e.src);
    }
    for (NodeId v = 0; v < n; ++v) {
      in_comp[v] = v >= s && fwd[v] && bwd[v];
      blocked[v] = false;
      b[v].clear();
    }
    circuit(s);
  }
}

/// Per-edge minimum length over all elementary cycles through the edge;
/// 0 for edges on no cycle.
inline std::map<std::pair<NodeId, NodeId>, std::uint32_t> girth_by_cycle_enumeration(std::size_t n,
                                                                                       const std::vector<Edge>& edges) {
  std::map<std::pair<NodeId, NodeId>, std::uint32_t> best;
  for (const auto& e : edges) best[{e.src, e.dst}] = 0;
  johnson_cycles(n, edges, [&](const std::vector<NodeId>& cycle) {
    const auto len = static_cast<std::uint32_t>(cycle.size());
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      auto& g = best[{cycle[i], cycle[(i + 1) % cycle.size()]}];
      if (g == 0 || len < g) g = len;
    }
  });
  return best;
}

/// Column k of sum_{t=1..max_len} A^t x via dense integer matrix powers.
inline std::vector<std::uint64_t> dense_walk_counts(std::size_t n, const std::vector<Edge>& edges,
                                                    const std::vector<NodeId>& target, std::size_t max_len) {
  using Mat = std::vector<std::vector<std::uint64_t>>;
  Mat a(n, std::vector<std::uint64_t>(n, 0));
  for (const auto& e : edges) a[e.src][e.dst] = 1;
  Mat power = a, sum = a;
  for (std::size_t t = 2; t <= max_len; ++t) {
    Mat next(n, std::vector<std::uint64_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (power[i][k])
          for (std::size_t j = 0; j < n; ++j) next[i][j] += power[i][k] * a[k][j];
    power = std::move(next);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sum[i][j] += power[i][j];
  }
  std::vector<std::uint64_t> col(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (NodeId t : target) col[i] += sum[i][t];
  return col;
}

/// Walks from `from` ending at `to` with 1..max_len steps, by explicit DFS.
inline std::uint64_t enumerate_walks(const std::vector<std::vector<NodeId>>& adj, NodeId from, NodeId to,
                                     std::size_t max_len) {
  std::uint64_t count = 0;
  std::function<void(NodeId, std::size_t)> go = [&](NodeId u, std::size_t len) {
    if (len > 0 && u == to) ++count;
    if (len == max_len) return;
    for (NodeId v : adj[u]) go(v, len + 1);
  };
  go(from, 0);
  return count;
}

struct JacobiSvd {
  std::vector<double> singular_values;     // descending
  std::vector<std::vector<double>> v;      // right vectors, v[j] is vector j
};

/// One-sided (Hestenes) Jacobi SVD of a dense m x n matrix, m >= n.
inline JacobiSvd jacobi_svd(std::vector<std::vector<double>> a) {
  const std::size_t m = a.size();
  const std::size_t n = m ? a[0].size() : 0;
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += a[i][p] * a[i][p];
          beta += a[i][q] * a[i][q];
          gamma += a[i][p] * a[i][q];
        }
        if (gamma == 0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
        const double c = 1 / std::sqrt(1 + t * t), s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = a[i][p], y = a[i][q];
          a[i][p] = c * x - s * y;
          a[i][q] = s * x + c * y;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double x = v[i][p], y = v[i][q];
          v[i][p] = c * x - s * y;
          v[i][q] = s * x + c * y;
        }
      }
    if (off < 1e-15) break;
  }
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0;
    for (std::size_t i = 0; i < m; ++i) norm += a[i][j] * a[i][j];
    order.emplace_back(std::sqrt(norm), j);
  }
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  JacobiSvd out;
  for (const auto& [sigma, j] : order) {
    out.singular_values.push_back(sigma);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][j];
    out.v.push_back(col);
  }
  return out;
}

/// Rand index between two labelings of the same items.
inline double rand_index(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      ++total;
      if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
    }
  return total ? static_cast<double>(agree) / static_cast<double>(total) : 1.0;
}

}  // namespace oracle
