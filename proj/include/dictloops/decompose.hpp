#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dictloops/graph.hpp"
#include "dictloops/loops.hpp"
#include "dictloops/parallel.hpp"

namespace dictloops {

class DecomposeError : public Error {
public:
  using Error::Error;
};

struct FilteredGraph {
  DictGraph graph;      // same nodes, only edges with girth <= L inside scope
  EdgeGirthMap girths;  // girths of the kept edges
};

/// Keeps exactly the edges of an existing girth map whose girth is <= L.
inline FilteredGraph filter_by_girth(const DictGraph& g, const EdgeGirthMap& girths, std::uint32_t length) {
  FilteredGraph f;
  f.girths.max_probe_depth = girths.max_probe_depth;
  for (std::size_t i = 0; i < girths.edges.size(); ++i)
    if (girths.girth[i] != no_cycle && girths.girth[i] <= length) {
      f.girths.edges.push_back(girths.edges[i]);
      f.girths.girth.push_back(girths.girth[i]);
    }
  f.graph = g.with_edges(f.girths.edges);
  return f;
}

/// Girths inside the subgraph induced by `scope`, then keep edges on a cycle
/// of length <= L. Only cycles up to L matter, so probing stops at L.
inline FilteredGraph filter_by_girth(const DictGraph& g, const std::vector<NodeId>& scope, std::uint32_t length = 5) {
  if (length < 2) throw Error("filter length must be >= 2");
  return filter_by_girth(g, edge_girth(g, {scope, length}), length);
}

struct Component {
  std::uint32_t id = 0;
  std::vector<NodeId> members;               // sorted
  std::vector<Edge> edges;                   // internal edges, sorted
  std::vector<std::uint32_t> edge_girth;     // parallel to edges, within the filtering scope
  std::optional<std::uint32_t> refined_from; // root component id, if refined
  std::uint32_t filter_length = 0;           // L that admitted these edges

  std::string lineage() const {
    return refined_from ? "refined-from:" + std::to_string(*refined_from) : std::string("root");
  }
};

struct ComponentSet {
  std::vector<Component> components;
  std::uint32_t filter_length = 5;
  std::size_t refine_threshold = 20;
  std::uint32_t refine_length = 4;
  /// Sizes of the unrefined components, indexed by the ids that
  /// Component::refined_from refers to.
  std::vector<std::size_t> root_sizes;
};

struct DecomposeOptions {
  std::uint32_t filter_length = 5;
  std::size_t refine_threshold = 20;
  std::uint32_t refine_length = 4;
  bool refine_to_fixpoint = false;
};

namespace detail {

/// SCCs of size >= 2 among the short-loop edges inside `scope`, ordered by
/// smallest member.
inline std::vector<Component> short_loop_components(const DictGraph& g, const std::vector<NodeId>& scope,
                                                    std::uint32_t length) {
  const auto filtered = filter_by_girth(g, scope, length);
  const auto part = scc(filtered.graph);
  std::vector<Component> comps;
  std::vector<std::int64_t> slot(part.components.size(), -1);
  for (std::size_t c = 0; c < part.components.size(); ++c) {
    if (part.components[c].size() < 2) continue;
    slot[c] = static_cast<std::int64_t>(comps.size());
    Component comp;
    comp.members = part.components[c];
    comp.filter_length = length;
    comps.push_back(std::move(comp));
  }
  const auto& fe = filtered.girths;
  for (std::size_t i = 0; i < fe.edges.size(); ++i) {
    const auto cu = part.component_of[fe.edges[i].src];
    if (cu != part.component_of[fe.edges[i].dst] || slot[cu] < 0) continue;
    auto& comp = comps[static_cast<std::size_t>(slot[cu])];
    comp.edges.push_back(fe.edges[i]);
    comp.edge_girth.push_back(fe.girth[i]);
  }
  std::sort(comps.begin(), comps.end(),
            [](const Component& a, const Component& b) { return a.members.front() < b.members.front(); });
  return comps;
}

inline DictGraph component_graph(const DictGraph& g, const Component& c) { return g.with_edges(c.edges); }

}  // namespace detail

/// Splits the core into strongly connected groups held together by short
/// loops. Components larger than refine_threshold are decomposed again at
/// refine_length, with girths recomputed inside the component.
inline ComponentSet decompose_core(const DictGraph& g, const std::vector<NodeId>& core,
                                   const DecomposeOptions& opt = {}) {
  if (core.empty()) throw DecomposeError("cannot decompose an empty core");
  ComponentSet result;
  result.filter_length = opt.filter_length;
  result.refine_threshold = opt.refine_threshold;
  result.refine_length = opt.refine_length;

  auto roots = detail::short_loop_components(g, core, opt.filter_length);
  for (const auto& r : roots) result.root_sizes.push_back(r.members.size());

  std::vector<std::vector<Component>> replaced(roots.size());
  parallel_for(roots.size(), [&](std::size_t i) {
    if (roots[i].members.size() <= opt.refine_threshold) return;
    std::vector<Component> work{roots[i]}, done;
    bool first_pass = true;
    while (!work.empty()) {
      Component c = std::move(work.back());
      work.pop_back();
      if (c.members.size() <= opt.refine_threshold || (!first_pass && !opt.refine_to_fixpoint)) {
        done.push_back(std::move(c));
        continue;
      }
      auto parts = detail::short_loop_components(detail::component_graph(g, c), c.members, opt.refine_length);
      const bool unchanged = parts.size() == 1 && parts[0].members == c.members && parts[0].edges == c.edges;
      if (!first_pass && unchanged) {
        done.push_back(std::move(parts[0]));
        continue;
      }
      first_pass = false;
      for (auto& p : parts) work.push_back(std::move(p));
    }
    std::sort(done.begin(), done.end(),
              [](const Component& a, const Component& b) { return a.members.front() < b.members.front(); });
    for (auto& c : done) c.refined_from = static_cast<std::uint32_t>(i);
    replaced[i] = std::move(done);
  });

  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (roots[i].members.size() <= opt.refine_threshold) {
      result.components.push_back(std::move(roots[i]));
      continue;
    }
    for (auto& c : replaced[i]) result.components.push_back(std::move(c));
  }
  if (result.components.empty())
    throw DecomposeError("no component with loops of length <= " + std::to_string(opt.filter_length) +
                         " in the core");
  for (std::size_t i = 0; i < result.components.size(); ++i)
    result.components[i].id = static_cast<std::uint32_t>(i);
  return result;
}

// ---------------------------------------------------------------------------
// Reporting

struct LongestCycle {
  std::size_t length = 0;
  bool exact = true;  // false when the search budget ran out (length is a lower bound)
};

/// Longest simple cycle by backtracking; components are small, but the
/// search is still budgeted.
inline LongestCycle longest_simple_cycle(const DictGraph& g, const std::vector<NodeId>& members,
                                         std::size_t step_budget = 2'000'000) {
  LongestCycle best;
  const auto mask = node_mask(g.node_count(), members);
  std::vector<bool> on_path(g.node_count(), false);
  std::size_t steps = 0;
  struct Frame {
    NodeId node;
    std::size_t next;
  };
  for (NodeId s : members) {
    std::vector<Frame> path{{s, 0}};
    on_path[s] = true;
    while (!path.empty()) {
      if (++steps > step_budget) {
        best.exact = false;
        for (const auto& f : path) on_path[f.node] = false;
        return best;
      }
      Frame& f = path.back();
      const auto succ = g.out(f.node);
      if (f.next == succ.size()) {
        on_path[f.node] = false;
        path.pop_back();
        continue;
      }
      const NodeId v = succ[f.next++];
      if (v == s) {
        best.length = std::max(best.length, path.size());
      } else if (v > s && mask[v] && !on_path[v]) {
        on_path[v] = true;
        path.push_back({v, 0});
      }
    }
  }
  return best;
}

struct ComponentSummary {
  std::uint32_t id = 0;
  std::string lineage;
  std::vector<std::string> lemmas;
  std::size_t edge_count = 0;
  std::uint32_t min_girth = 0;
  std::uint32_t max_girth = 0;
  LongestCycle longest_cycle;
};

inline std::vector<ComponentSummary> component_report(const ComponentSet& cs, const DictGraph& g) {
  std::vector<ComponentSummary> report;
  for (const auto& c : cs.components) {
    if (c.members.size() < 2) continue;
    ComponentSummary s;
    s.id = c.id;
    s.lineage = c.lineage();
    for (NodeId v : c.members) s.lemmas.push_back(g.node(v).word());
    s.edge_count = c.edges.size();
    if (!c.edge_girth.empty()) {
      s.min_girth = *std::min_element(c.edge_girth.begin(), c.edge_girth.end());
      s.max_girth = *std::max_element(c.edge_girth.begin(), c.edge_girth.end());
    }
    s.longest_cycle = longest_simple_cycle(detail::component_graph(g, c), c.members);
    report.push_back(std::move(s));
  }
  return report;
}

inline void write_component_report(std::ostream& out, const std::vector<ComponentSummary>& report) {
  for (const auto& s : report) {
    out << "component " << s.id << " (" << s.lineage << ") size " << s.lemmas.size() << ", " << s.edge_count
        << " edges, girth " << s.min_girth << "-" << s.max_girth << ", longest cycle "
        << (s.longest_cycle.exact ? "" : ">=") << s.longest_cycle.length << "\n  ";
    for (std::size_t i = 0; i < s.lemmas.size(); ++i) out << (i ? ", " : "") << s.lemmas[i];
    out << '\n';
  }
}

inline nlohmann::ordered_json components_json(const ComponentSet& cs, const DictGraph& g) {
  nlohmann::ordered_json j;
  j["filter_length"] = cs.filter_length;
  j["refine_threshold"] = cs.refine_threshold;
  j["refine_length"] = cs.refine_length;
  j["root_sizes"] = cs.root_sizes;
  auto& arr = j["components"] = nlohmann::ordered_json::array();
  for (const auto& c : cs.components) {
    nlohmann::ordered_json item;
    item["id"] = c.id;
    item["lineage"] = c.lineage();
    item["filter_length"] = c.filter_length;
    auto& members = item["members"] = nlohmann::ordered_json::array();
    for (NodeId v : c.members) members.push_back(g.node(v).key);
    auto& edges = item["edges"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < c.edges.size(); ++i)
      edges.push_back({g.node(c.edges[i].src).key, g.node(c.edges[i].dst).key, c.edge_girth[i]});
    arr.push_back(std::move(item));
  }
  return j;
}

inline const char* girth_color(std::uint32_t girth) {
  switch (girth) {
    case 2: return "red";
    case 3: return "green";
    case 4: return "blue";
    case 5: return "orange";
    default: return "gray";
  }
}

/// Graphviz rendering, one cluster per component, edges colored by girth.
inline void write_components_dot(std::ostream& out, const ComponentSet& cs, const DictGraph& g) {
  const auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') q += '\\';
      q += c;
    }
    return q + '"';
  };
  out << "digraph components {\n";
  for (const auto& c : cs.components) {
    out << "  subgraph cluster_" << c.id << " {\n    label=" << quote("component " + std::to_string(c.id)) << ";\n";
    for (NodeId v : c.members) out << "    " << quote(g.node(v).key) << " [label=" << quote(g.node(v).word()) << "];\n";
    for (std::size_t i = 0; i < c.edges.size(); ++i)
      out << "    " << quote(g.node(c.edges[i].src).key) << " -> " << quote(g.node(c.edges[i].dst).key)
          << " [color=" << girth_color(c.edge_girth[i]) << "];\n";
    out << "  }\n";
  }
  out << "}\n";
}

}  // namespace dictloops
