#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dictloops {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GraphError : public Error {
public:
  using Error::Error;
};

/// Dense index of a node in its owning graph; row/column of the adjacency matrix.
using NodeId = std::uint32_t;

enum class PartOfSpeech : std::uint8_t { noun, verb, adj, adv, other };

inline const char* pos_tag(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::noun: return "n";
    case PartOfSpeech::verb: return "v";
    case PartOfSpeech::adj: return "a";
    case PartOfSpeech::adv: return "r";
    case PartOfSpeech::other: break;
  }
  return "x";
}

inline PartOfSpeech parse_pos_tag(const std::string& tag) {
  if (tag == "n" || tag == "noun") return PartOfSpeech::noun;
  if (tag == "v" || tag == "verb") return PartOfSpeech::verb;
  if (tag == "a" || tag == "s" || tag == "adj") return PartOfSpeech::adj;
  if (tag == "r" || tag == "adv") return PartOfSpeech::adv;
  return PartOfSpeech::other;
}

/// One sense of a word (a synset), i.e. one vertex of the definition graph.
struct SenseNode {
  std::string key;                  // external id, e.g. "dog.n.01"
  std::vector<std::string> lemmas;  // non-empty
  PartOfSpeech pos = PartOfSpeech::noun;
  std::uint32_t sense_rank = 1;     // 1 = first sense
  std::string gloss;

  const std::string& word() const { return lemmas.front(); }
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable directed graph with sorted out- and in-adjacency (CSR).
///
/// Instances are produced by build_graph() or derived from an existing
/// graph with with_edges(); node metadata is shared between derived graphs.
class DictGraph {
public:
  DictGraph() : nodes_(std::make_shared<const std::vector<SenseNode>>()) {
    out_offsets_.assign(1, 0);
    in_offsets_.assign(1, 0);
  }

  std::size_t node_count() const { return nodes_->size(); }
  std::size_t edge_count() const { return out_targets_.size(); }

  std::span<const NodeId> out(NodeId u) const {
    return {out_targets_.data() + out_offsets_[u], out_targets_.data() + out_offsets_[u + 1]};
  }
  std::span<const NodeId> in(NodeId v) const {
    return {in_sources_.data() + in_offsets_[v], in_sources_.data() + in_offsets_[v + 1]};
  }
  std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  bool has_edge(NodeId u, NodeId v) const {
    const auto succ = out(u);
    return std::binary_search(succ.begin(), succ.end(), v);
  }

  const SenseNode& node(NodeId u) const { return (*nodes_)[u]; }
  const std::vector<SenseNode>& nodes() const { return *nodes_; }

  /// Edges in (src, dst) lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> result;
    result.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u)
      for (NodeId v : out(u)) result.push_back({u, v});
    return result;
  }

  /// Index of edge (u, v) in edges() order; edge must exist.
  std::size_t edge_index(NodeId u, NodeId v) const {
    const auto succ = out(u);
    return out_offsets_[u] + static_cast<std::size_t>(
        std::lower_bound(succ.begin(), succ.end(), v) - succ.begin());
  }

  /// New graph over the same nodes with a different edge set. Edges must
  /// already be simple (no duplicates, no self-loops, in range).
  DictGraph with_edges(std::vector<Edge> edges) const {
    DictGraph g;
    g.nodes_ = nodes_;
    g.assign_edges(std::move(edges));
    return g;
  }

private:
  friend struct GraphBuilder;

  void assign_edges(std::vector<Edge> edges) {
    const std::size_t n = node_count();
    std::sort(edges.begin(), edges.end());
    out_offsets_.assign(n + 1, 0);
    in_offsets_.assign(n + 1, 0);
    for (const Edge& e : edges) {
      ++out_offsets_[e.src + 1];
      ++in_offsets_[e.dst + 1];
    }
    std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
    std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
    out_targets_.resize(edges.size());
    in_sources_.resize(edges.size());
    std::vector<std::size_t> fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      out_targets_[i] = edges[i].dst;
      // edges are sorted by src, so each in-list comes out sorted too
      in_sources_[fill[edges[i].dst]++] = edges[i].src;
    }
  }

  std::shared_ptr<const std::vector<SenseNode>> nodes_;
  std::vector<std::size_t> out_offsets_;
  std::vector<NodeId> out_targets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<NodeId> in_sources_;
};

struct BuildResult {
  DictGraph graph;
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;
};

struct GraphBuilder {
  static DictGraph make(std::vector<SenseNode> nodes, std::vector<Edge> edges) {
    DictGraph g;
    g.nodes_ = std::make_shared<const std::vector<SenseNode>>(std::move(nodes));
    g.assign_edges(std::move(edges));
    return g;
  }
};

/// Builds a simple digraph. Self-loops and repeated edges are dropped and
/// counted; an endpoint outside [0, nodes.size()) is an error.
inline BuildResult build_graph(std::vector<SenseNode> nodes, std::vector<Edge> edges) {
  const std::size_t n = nodes.size();
  BuildResult result;
  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.src >= n || e.dst >= n)
      throw GraphError("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                       " has an endpoint outside [0, " + std::to_string(n) + ")");
    if (e.src == e.dst) {
      ++result.self_loops_dropped;
      continue;
    }
    kept.push_back(e);
  }
  std::sort(kept.begin(), kept.end());
  const auto last = std::unique(kept.begin(), kept.end());
  result.duplicates_dropped = static_cast<std::size_t>(kept.end() - last);
  kept.erase(last, kept.end());
  result.graph = GraphBuilder::make(std::move(nodes), std::move(kept));
  return result;
}

/// Placeholder metadata ("v0", "v1", ...) for graphs built from bare edges.
inline std::vector<SenseNode> anonymous_nodes(std::size_t n) {
  std::vector<SenseNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i].key = "v" + std::to_string(i);
    nodes[i].lemmas = {nodes[i].key};
  }
  return nodes;
}

/// Membership mask for a node subset.
inline std::vector<bool> node_mask(std::size_t node_count, std::span<const NodeId> members) {
  std::vector<bool> mask(node_count, false);
  for (NodeId u : members) mask.at(u) = true;
  return mask;
}

/// Same nodes, only edges with both endpoints in `scope`.
inline DictGraph induced_subgraph(const DictGraph& g, std::span<const NodeId> scope) {
  const auto mask = node_mask(g.node_count(), scope);
  std::vector<Edge> kept;
  for (NodeId u : scope)
    for (NodeId v : g.out(u))
      if (mask[v]) kept.push_back({u, v});
  return g.with_edges(std::move(kept));
}

enum class StartPolicy { automatic, include, exclude };

/// Forward closure of `start`. Under the automatic policy the start node is
/// part of its own closure only when it lies on a cycle.
inline std::vector<NodeId> descendants(const DictGraph& g, NodeId start,
                                       StartPolicy policy = StartPolicy::automatic) {
  if (start >= g.node_count()) throw GraphError("start node " + std::to_string(start) + " out of range");
  std::vector<bool> seen(g.node_count(), false);
  std::vector<NodeId> queue;
  for (NodeId v : g.out(start)) {
    if (!seen[v]) {
      seen[v] = true;
      queue.push_back(v);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (NodeId v : g.out(queue[head]))
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
  if (policy == StartPolicy::include) seen[start] = true;
  if (policy == StartPolicy::exclude) seen[start] = false;
  std::vector<NodeId> result;
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (seen[v]) result.push_back(v);
  return result;
}

struct SccPartition {
  std::vector<std::uint32_t> component_of;
  /// Sorted member lists, in reverse topological order of the condensation:
  /// every condensation edge runs from a higher index to a lower one.
  std::vector<std::vector<NodeId>> components;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> condensation_edges;
};

/// Tarjan's strongly connected components, iterative so deep graphs do not
/// exhaust the call stack.
inline SccPartition scc(const DictGraph& g) {
  constexpr std::uint32_t unvisited = UINT32_MAX;
  const std::size_t n = g.node_count();
  SccPartition part;
  part.component_of.assign(n, unvisited);
  std::vector<std::uint32_t> index(n, unvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeId> stack;
  struct Frame {
    NodeId node;
    std::size_t next_child;
  };
  std::vector<Frame> call;
  std::uint32_t counter = 0;

  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& frame = call.back();
      const NodeId u = frame.node;
      const auto succ = g.out(u);
      if (frame.next_child < succ.size()) {
        const NodeId v = succ[frame.next_child++];
        if (index[v] == unvisited) {
          index[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = true;
          call.push_back({v, 0});
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], index[v]);
        }
        continue;
      }
      if (low[u] == index[u]) {
        const auto id = static_cast<std::uint32_t>(part.components.size());
        std::vector<NodeId> members;
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          part.component_of[w] = id;
          members.push_back(w);
        } while (w != u);
        std::sort(members.begin(), members.end());
        part.components.push_back(std::move(members));
      }
      call.pop_back();
      if (!call.empty()) {
        const NodeId parent = call.back().node;
        low[parent] = std::min(low[parent], low[u]);
      }
    }
  }

  for (NodeId u = 0; u < n; ++u)
    for (NodeId v : g.out(u))
      if (part.component_of[u] != part.component_of[v])
        part.condensation_edges.emplace_back(part.component_of[u], part.component_of[v]);
  std::sort(part.condensation_edges.begin(), part.condensation_edges.end());
  part.condensation_edges.erase(
      std::unique(part.condensation_edges.begin(), part.condensation_edges.end()),
      part.condensation_edges.end());
  return part;
}

struct DegreeHistograms {
  std::map<std::size_t, std::size_t> in;   // degree -> node count
  std::map<std::size_t, std::size_t> out;
};

inline DegreeHistograms degree_histograms(const DictGraph& g) {
  DegreeHistograms h;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    ++h.in[g.in_degree(u)];
    ++h.out[g.out_degree(u)];
  }
  return h;
}

}  // namespace dictloops
