#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dictloops/graph.hpp"

namespace testing_support {

/// Graph from a compact arc list like "a>b b>c c>a"; nodes are named by the
/// tokens and numbered in order of first appearance.
struct Named {
  dictloops::DictGraph graph;
  std::map<std::string, dictloops::NodeId> id;
  std::size_t duplicates = 0;
  std::size_t self_loops = 0;

  dictloops::NodeId operator[](const std::string& name) const { return id.at(name); }
  std::vector<dictloops::NodeId> ids(std::initializer_list<const char*> names) const {
    std::vector<dictloops::NodeId> out;
    for (const char* n : names) out.push_back(id.at(n));
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline Named named_graph(const std::string& arcs, std::initializer_list<const char*> extra_nodes = {}) {
  Named g;
  std::vector<dictloops::SenseNode> nodes;
  auto intern = [&](const std::string& name) {
    auto [it, fresh] = g.id.emplace(name, static_cast<dictloops::NodeId>(nodes.size()));
    if (fresh) {
      dictloops::SenseNode n;
      n.key = name + ".n.01";
      n.lemmas = {name};
      nodes.push_back(n);
    }
    return it->second;
  };
  std::vector<dictloops::Edge> edges;
  std::istringstream in(arcs);
  std::string tok;
  while (in >> tok) {
    const auto gt = tok.find('>');
    const auto u = intern(tok.substr(0, gt));
    if (gt != std::string::npos) edges.push_back({u, intern(tok.substr(gt + 1))});
  }
  for (const char* n : extra_nodes) intern(n);
  auto built = dictloops::build_graph(std::move(nodes), std::move(edges));
  g.graph = std::move(built.graph);
  g.duplicates = built.duplicates_dropped;
  g.self_loops = built.self_loops_dropped;
  return g;
}

}  // namespace testing_support
