#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dictloops/graph.hpp"
#include "dictloops/ingest.hpp"
#include "dictloops/parallel.hpp"
#include "dictloops/random.hpp"

namespace dictloops {

class NoCoreError : public Error {
public:
  using Error::Error;
};

class MemoryCapError : public Error {
public:
  using Error::Error;
};

/// Number of distinct nodes reached within each BFS depth from one start.
struct ConvergenceProfile {
  NodeId start = 0;
  /// cumulative[d] = nodes (other than start) reachable by a path of length <= d.
  std::vector<std::size_t> cumulative;
  /// Smallest d with cumulative[d] >= final / 2.
  std::size_t half_height_distance = 0;
  /// Smallest d at which the final count is reached.
  std::size_t saturation_distance = 0;
  /// True when the BFS frontier emptied within max_depth.
  bool saturated = false;

  std::size_t final_count() const { return cumulative.back(); }
};

inline ConvergenceProfile convergence_profile(const DictGraph& g, NodeId start, std::size_t max_depth = 60) {
  if (start >= g.node_count()) throw GraphError("start node " + std::to_string(start) + " out of range");
  if (max_depth < 1) throw Error("max_depth must be >= 1");
  ConvergenceProfile p;
  p.start = start;
  p.cumulative.assign(max_depth + 1, 0);
  std::vector<bool> seen(g.node_count(), false);
  seen[start] = true;
  std::vector<NodeId> frontier{start}, next;
  std::size_t reached = 0;
  for (std::size_t depth = 1; depth <= max_depth; ++depth) {
    next.clear();
    for (NodeId u : frontier)
      for (NodeId v : g.out(u))
        if (!seen[v]) {
          seen[v] = true;
          next.push_back(v);
        }
    reached += next.size();
    p.cumulative[depth] = reached;
    frontier.swap(next);
    if (frontier.empty()) {
      std::fill(p.cumulative.begin() + static_cast<std::ptrdiff_t>(depth), p.cumulative.end(), reached);
      p.saturated = true;
      break;
    }
  }
  const std::size_t total = p.final_count();
  for (std::size_t d = 0; d <= max_depth; ++d)
    if (2 * p.cumulative[d] >= total) {
      p.half_height_distance = d;
      break;
    }
  for (std::size_t d = 0; d <= max_depth; ++d)
    if (p.cumulative[d] == total) {
      p.saturation_distance = d;
      break;
    }
  return p;
}

struct SampleStats {
  NodeId start = 0;
  std::size_t descendant_count = 0;
  bool degenerate = false;
  ConvergenceProfile profile;
};

struct CoreSet {
  std::vector<NodeId> members;  // sorted
  std::vector<NodeId> sample;
  std::vector<SampleStats> sample_stats;
  /// Per node: fraction of non-degenerate samples (or, for the exact core,
  /// of all nodes) whose closure contains it.
  std::vector<double> membership_fraction;
  std::vector<NodeId> degenerate_samples;
  double threshold = 1.0;
};

struct SampledCoreOptions {
  std::size_t sample_size = 100;
  std::uint64_t seed = 0;
  double membership_threshold = 1.0;
  double degeneracy_fraction = 0.01;
  std::size_t max_depth = 60;
};

/// Draws `count` distinct nodes uniformly (partial Fisher-Yates).
inline std::vector<NodeId> sample_nodes(std::size_t node_count, std::size_t count, std::uint64_t seed) {
  std::vector<NodeId> pool(node_count);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(node_count - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

/// Core as the intersection of descendant sets of a random node sample.
/// Samples whose closure is smaller than degeneracy_fraction * |V| (small
/// isolated loops) are set aside before intersecting.
inline CoreSet sampled_core(const DictGraph& g, const SampledCoreOptions& opt = {}) {
  const std::size_t n = g.node_count();
  if (opt.sample_size == 0 || opt.sample_size > n)
    throw Error("sample size " + std::to_string(opt.sample_size) + " must be in [1, " + std::to_string(n) + "]");
  CoreSet core;
  core.threshold = opt.membership_threshold;
  core.sample = sample_nodes(n, opt.sample_size, opt.seed);

  std::vector<std::vector<NodeId>> closures(core.sample.size());
  core.sample_stats.resize(core.sample.size());
  parallel_for(core.sample.size(), [&](std::size_t i) {
    closures[i] = descendants(g, core.sample[i]);
    auto& st = core.sample_stats[i];
    st.start = core.sample[i];
    st.descendant_count = closures[i].size();
    st.degenerate = static_cast<double>(st.descendant_count) < opt.degeneracy_fraction * static_cast<double>(n);
    st.profile = convergence_profile(g, core.sample[i], opt.max_depth);
  });

  std::vector<std::size_t> hits(n, 0);
  std::size_t usable = 0;
  for (std::size_t i = 0; i < closures.size(); ++i) {
    if (core.sample_stats[i].degenerate) {
      core.degenerate_samples.push_back(core.sample[i]);
      continue;
    }
    ++usable;
    for (NodeId v : closures[i]) ++hits[v];
  }
  if (usable == 0) throw NoCoreError("all " + std::to_string(core.sample.size()) + " samples are degenerate; graph has no core");

  core.membership_fraction.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    core.membership_fraction[v] = static_cast<double>(hits[v]) / static_cast<double>(usable);
    // compare counts so that a threshold of 1.0 is an exact intersection
    if (static_cast<double>(hits[v]) >= opt.membership_threshold * static_cast<double>(usable) - 1e-9)
      if (hits[v] > 0) core.members.push_back(v);
  }
  return core;
}

struct ExactCoreOptions {
  double coverage_fraction = 0.99;
  std::size_t memory_cap_bytes = std::size_t{2} << 30;
};

/// Projected bitset memory of exact_core: one |V|-bit row per SCC.
inline std::size_t exact_core_memory(std::size_t scc_count, std::size_t node_count) {
  return scc_count * ((node_count + 63) / 64) * 8;
}

/// Deterministic core: nodes reached from at least coverage_fraction * |V|
/// nodes (a node on a cycle counts as reaching itself). Ancestor sets are
/// accumulated over the condensation in topological order, so memory is
/// O(#SCC * |V| / 8) bytes.
inline CoreSet exact_core(const DictGraph& g, const ExactCoreOptions& opt = {}) {
  const std::size_t n = g.node_count();
  const auto part = scc(g);
  const std::size_t k = part.components.size();
  const std::size_t words = (n + 63) / 64;
  const std::size_t need = exact_core_memory(k, n);
  if (need > opt.memory_cap_bytes)
    throw MemoryCapError("exact core needs ~" + std::to_string(need >> 20) + " MiB of bitsets (cap " +
                         std::to_string(opt.memory_cap_bytes >> 20) + " MiB); use sampled_core instead");

  std::vector<std::vector<std::uint64_t>> ancestors(k);
  std::vector<std::vector<std::uint32_t>> preds(k);
  for (const auto& [a, b] : part.condensation_edges) preds[b].push_back(a);

  // Components come out of Tarjan sinks-first, so walking indices downwards
  // visits every predecessor before its successors.
  std::vector<std::size_t> count(k, 0);
  for (std::size_t c = k; c-- > 0;) {
    auto& bits = ancestors[c];
    bits.assign(words, 0);
    for (std::uint32_t p : preds[c]) {
      const auto& pb = ancestors[p];
      for (std::size_t w = 0; w < words; ++w) bits[w] |= pb[w];
      for (NodeId u : part.components[p]) bits[u / 64] |= std::uint64_t{1} << (u % 64);
    }
    if (part.components[c].size() >= 2)
      for (NodeId u : part.components[c]) bits[u / 64] |= std::uint64_t{1} << (u % 64);
    std::size_t total = 0;
    for (auto w : bits) total += static_cast<std::size_t>(__builtin_popcountll(w));
    count[c] = total;
  }

  CoreSet core;
  core.threshold = opt.coverage_fraction;
  core.membership_fraction.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    const std::size_t reach = count[part.component_of[v]];
    core.membership_fraction[v] = n ? static_cast<double>(reach) / static_cast<double>(n) : 0.0;
    if (reach > 0 && static_cast<double>(reach) >= opt.coverage_fraction * static_cast<double>(n) - 1e-9)
      core.members.push_back(v);
  }
  return core;
}

// ---------------------------------------------------------------------------
// Word-list overlap

/// Percent of the column list covered by the intersection, rounded to the
/// nearest integer (314 of 600 -> 52).
inline int overlap_percent(std::size_t intersection, std::size_t column_size) {
  if (column_size == 0) throw Error("overlap against an empty list");
  return static_cast<int>(std::lround(100.0 * static_cast<double>(intersection) / static_cast<double>(column_size)));
}

struct OverlapCell {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t count = 0;
  int percent = 100;
};

struct OverlapTable {
  std::vector<std::string> names;
  std::vector<std::size_t> sizes;
  std::vector<OverlapCell> cells;  // upper triangle, row < col, row-major
};

/// Upper-triangular intersection table of the core words and each list.
inline OverlapTable wordlist_overlap(const WordList& core_words, const std::vector<WordList>& lists) {
  if (lists.empty()) throw Error("wordlist_overlap needs at least one list");
  std::vector<const WordList*> all{&core_words};
  for (const auto& l : lists) all.push_back(&l);
  OverlapTable t;
  for (const auto* l : all) {
    if (l->words.empty()) throw Error("word list '" + l->name + "' is empty");
    t.names.push_back(l->name);
    t.sizes.push_back(l->words.size());
  }
  for (std::size_t r = 0; r < all.size(); ++r)
    for (std::size_t c = r + 1; c < all.size(); ++c) {
      std::size_t common = 0;
      for (const auto& w : all[r]->words) common += all[c]->words.count(w);
      t.cells.push_back({r, c, common, overlap_percent(common, all[c]->words.size())});
    }
  return t;
}

/// Case-folded first lemmas of a node set.
inline WordList core_word_list(const DictGraph& g, const std::vector<NodeId>& members, std::string name = "core") {
  WordList list{std::move(name), {}};
  for (NodeId v : members) list.words.insert(fold_case(g.node(v).word()));
  return list;
}

}  // namespace dictloops
