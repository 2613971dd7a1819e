#pragma once

// File-based pipeline stages. Each stage reads the artifacts of earlier
// stages from one working directory, writes its own outputs atomically and
// records its parameters in manifest.json. Outputs depend only on the
// inputs and parameters, so equal manifests give byte-identical files.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "dictloops/core.hpp"
#include "dictloops/decompose.hpp"
#include "dictloops/etymology.hpp"
#include "dictloops/graph.hpp"
#include "dictloops/ingest.hpp"
#include "dictloops/loops.hpp"
#include "dictloops/pathmatrix.hpp"

namespace dictloops::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* tool_name = "dictloops";
inline constexpr const char* tool_version = "0.1.0";

/// A required input or upstream artifact does not exist (exit code 2).
class MissingArtifact : public Error {
public:
  explicit MissingArtifact(const fs::path& p) : Error("missing artifact: " + p.string()), path(p) {}
  fs::path path;
};

/// A parameter is outside its documented range (exit code 3).
class ParamError : public Error {
public:
  using Error::Error;
};

struct Params {
  // ingest
  std::string gloss;
  std::string nodes;
  std::string edges;
  std::string pos = "n";  // part-of-speech filter, or "all"
  bool first_sense = false;
  // core
  std::size_t sample = 100;
  std::uint64_t seed = 7;
  double threshold = 1.0;
  double degeneracy = 0.01;
  std::size_t max_depth = 60;
  bool exact = false;
  double coverage = 0.99;
  std::size_t memory_cap_mb = 2048;
  // loops / randomize
  std::string scope = "core";
  std::vector<std::uint64_t> randomized_seeds;
  std::size_t swap_factor = 10;
  std::size_t max_attempts_factor = 100;
  std::size_t max_probe_depth = 0;  // 0 = unbounded
  bool randomize_full = false;
  // decompose
  std::uint32_t filter_length = 5;
  std::size_t refine_threshold = 20;
  std::uint32_t refine_length = 4;
  bool refine_fixpoint = false;
  // paths / svd
  std::size_t max_len = 5;
  double prune = 0.8;
  std::size_t k = 10;
  bool column_scale = false;
  double coeff_threshold = 0.1;
  std::size_t top_n = 10;
  // etymology
  std::string dates;
  std::size_t trials = 1000;
  int bin_width = 50;
  // report
  std::vector<std::string> wordlists;
  // run
  bool timings = false;
};

inline void validate(const Params& p) {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ParamError(what);
  };
  require(p.pos == "all" || p.pos == "n" || p.pos == "v" || p.pos == "a" || p.pos == "r",
          "pos must be one of n, v, a, r, all");
  require(p.sample >= 1, "sample must be >= 1");
  require(p.threshold > 0 && p.threshold <= 1, "threshold must be in (0, 1]");
  require(p.degeneracy >= 0 && p.degeneracy < 1, "degeneracy must be in [0, 1)");
  require(p.max_depth >= 1, "max-depth must be >= 1");
  require(p.coverage > 0 && p.coverage <= 1, "coverage must be in (0, 1]");
  require(p.scope == "core" || p.scope == "all", "scope must be core or all");
  require(p.swap_factor >= 1, "swap-factor must be >= 1");
  require(p.max_attempts_factor >= 1, "max-attempts-factor must be >= 1");
  require(p.max_probe_depth == 0 || p.max_probe_depth >= 2, "max-probe-depth must be 0 (unbounded) or >= 2");
  require(p.filter_length >= 2, "filter-length must be >= 2");
  require(p.refine_length >= 2, "refine-length must be >= 2");
  require(p.refine_threshold >= 2, "refine-threshold must be >= 2");
  require(p.max_len >= 1 && p.max_len <= 64, "max-len must be in [1, 64]");
  require(p.prune > 0 && p.prune <= 1, "prune must be in (0, 1]");
  require(p.k >= 1, "k must be >= 1");
  require(p.coeff_threshold >= 0 && p.coeff_threshold < 1, "coeff-threshold must be in [0, 1)");
  require(p.top_n >= 1, "top-n must be >= 1");
  require(p.trials >= 1, "trials must be >= 1");
  require(p.bin_width >= 1, "bin-width must be >= 1");
}

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string sha256_file(const fs::path& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed for " + path.string());
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

inline fs::path require_file(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifact(path);
  return path;
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Manifest

inline json load_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) {
    json m;
    m["tool"] = tool_name;
    m["version"] = tool_version;
    m["inputs"] = json::object();
    m["stages"] = json::object();
    return m;
  }
  return json::parse(read_file(path));
}

class StageRecord {
public:
  StageRecord(fs::path dir, std::string stage, const Params& p)
      : dir_(std::move(dir)), stage_(std::move(stage)), timings_(p.timings),
        start_(std::chrono::steady_clock::now()) {}

  json& params() { return params_; }

  void input(const std::string& role, const fs::path& path) {
    inputs_[role] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  }

  void commit() {
    json m = load_manifest(dir_);
    for (const auto& [role, v] : inputs_.items()) m["inputs"][role] = v;
    m["stages"][stage_] = params_;
    if (timings_) {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
      m["timings_ms"][stage_] = ms;
    }
    write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
  }

private:
  fs::path dir_;
  std::string stage_;
  bool timings_;
  std::chrono::steady_clock::time_point start_;
  json params_ = json::object();
  json inputs_ = json::object();
};

// ---------------------------------------------------------------------------
// Artifact loaders

inline DictGraph load_graph(const fs::path& dir) {
  const auto nodes = require_file(dir / "graph.nodes.jsonl");
  const auto edges = require_file(dir / "graph.edges.tsv");
  return parse_edge_list(nodes.string(), edges.string()).graph;
}

inline std::unordered_map<std::string, NodeId> key_index(const DictGraph& g) {
  std::unordered_map<std::string, NodeId> idx;
  for (NodeId v = 0; v < g.node_count(); ++v) idx.emplace(g.node(v).key, v);
  return idx;
}

inline NodeId lookup(const std::unordered_map<std::string, NodeId>& idx, const std::string& key) {
  const auto it = idx.find(key);
  if (it == idx.end()) throw Error("artifact refers to unknown node '" + key + "'");
  return it->second;
}

inline std::vector<NodeId> load_core(const fs::path& dir, const DictGraph& g) {
  const auto j = json::parse(read_file(require_file(dir / "core.json")));
  const auto idx = key_index(g);
  std::vector<NodeId> members;
  for (const auto& key : j.at("members")) members.push_back(lookup(idx, key.get<std::string>()));
  std::sort(members.begin(), members.end());
  return members;
}

inline ComponentSet load_components(const fs::path& dir, const DictGraph& g) {
  const auto j = json::parse(read_file(require_file(dir / "components.json")));
  const auto idx = key_index(g);
  ComponentSet cs;
  cs.filter_length = j.at("filter_length").get<std::uint32_t>();
  cs.refine_threshold = j.at("refine_threshold").get<std::size_t>();
  cs.refine_length = j.at("refine_length").get<std::uint32_t>();
  cs.root_sizes = j.at("root_sizes").get<std::vector<std::size_t>>();
  for (const auto& item : j.at("components")) {
    Component c;
    c.id = item.at("id").get<std::uint32_t>();
    const auto lineage = item.at("lineage").get<std::string>();
    if (lineage.rfind("refined-from:", 0) == 0) c.refined_from = static_cast<std::uint32_t>(std::stoul(lineage.substr(13)));
    c.filter_length = item.at("filter_length").get<std::uint32_t>();
    for (const auto& key : item.at("members")) c.members.push_back(lookup(idx, key.get<std::string>()));
    for (const auto& e : item.at("edges")) {
      c.edges.push_back({lookup(idx, e.at(0).get<std::string>()), lookup(idx, e.at(1).get<std::string>())});
      c.edge_girth.push_back(e.at(2).get<std::uint32_t>());
    }
    cs.components.push_back(std::move(c));
  }
  return cs;
}

inline std::string write_walk_matrix(const WalkMatrix& w, double prune_threshold) {
  json header;
  header["rows"] = w.rows;
  header["cols"] = w.cols();
  header["max_len"] = w.max_walk_length;
  header["prune_threshold"] = prune_threshold;
  header["column_ids"] = w.column_ids;
  header["pruned_components"] = w.pruned_components;
  header["saturated_entries"] = w.saturated_entries;
  std::string out = header.dump() + "\n";
  for (std::size_t r = 0; r < w.rows; ++r)
    for (std::size_t i = w.row_offsets[r]; i < w.row_offsets[r + 1]; ++i)
      out += std::to_string(r) + "," + std::to_string(w.col_index[i]) + "," + std::to_string(w.values[i]) + "\n";
  return out;
}

inline WalkMatrix load_walk_matrix(const fs::path& dir) {
  std::istringstream in(read_file(require_file(dir / "walk_matrix.txt")));
  std::string line;
  std::getline(in, line);
  const auto header = json::parse(line);
  WalkMatrix w;
  w.rows = header.at("rows").get<std::size_t>();
  w.max_walk_length = header.at("max_len").get<std::size_t>();
  w.column_ids = header.at("column_ids").get<std::vector<std::uint32_t>>();
  w.pruned_components = header.at("pruned_components").get<std::vector<std::uint32_t>>();
  w.saturated_entries = header.at("saturated_entries").get<std::size_t>();
  w.row_offsets.assign(w.rows + 1, 0);
  std::size_t r, c, last_row = 0;
  unsigned long long v;
  while (std::getline(in, line)) {
    if (std::sscanf(line.c_str(), "%zu,%zu,%llu", &r, &c, &v) != 3 || r >= w.rows || c >= w.cols() || r < last_row)
      throw Error("malformed walk matrix line: " + line);
    last_row = r;
    ++w.row_offsets[r + 1];
    w.col_index.push_back(static_cast<std::uint32_t>(c));
    w.values.push_back(v);
  }
  for (std::size_t q = 0; q < w.rows; ++q) w.row_offsets[q + 1] += w.row_offsets[q];
  return w;
}

inline std::string component_label(const DictGraph& g, const Component& c, std::size_t words = 3) {
  std::string label;
  for (std::size_t i = 0; i < c.members.size() && i < words; ++i) label += (i ? ", " : "") + g.node(c.members[i]).word();
  if (c.members.size() > words) label += ", ...";
  return label;
}

// ---------------------------------------------------------------------------
// Stages

inline void run_ingest(const fs::path& dir, const Params& p) {
  validate(p);
  StageRecord rec(dir, "ingest", p);
  const std::optional<PartOfSpeech> filter =
      p.pos == "all" ? std::nullopt : std::optional<PartOfSpeech>(parse_pos_tag(p.pos));
  json report;
  BuildResult build;
  if (!p.gloss.empty()) {
    rec.input("gloss", require_file(p.gloss));
    const auto parsed = parse_gloss_file(p.gloss);
    const auto linked = p.first_sense ? reduce_first_sense(parsed.records, filter) : link_graph(parsed.records, filter);
    build = linked.build;
    report["records"] = parsed.records.size();
    report["unresolved_links"] = parsed.unresolved_links;
    report["unresolved_skipped"] = linked.unresolved_skipped;
    report["filtered_skipped"] = linked.filtered_skipped;
  } else if (!p.nodes.empty() && !p.edges.empty()) {
    rec.input("nodes", require_file(p.nodes));
    rec.input("edges", require_file(p.edges));
    build = parse_edge_list(p.nodes, p.edges);
  } else {
    throw ParamError("ingest needs --gloss, or --nodes together with --edges");
  }
  const DictGraph& g = build.graph;
  report["nodes"] = g.node_count();
  report["edges"] = g.edge_count();
  report["duplicates_dropped"] = build.duplicates_dropped;
  report["self_loops_dropped"] = build.self_loops_dropped;

  std::ostringstream nodes, edges;
  write_nodes_jsonl(nodes, g);
  write_edge_list(edges, g);
  const auto hist = degree_histograms(g);
  std::string degrees = "direction,degree,count\n";
  for (const auto& [d, c] : hist.in) degrees += "in," + std::to_string(d) + "," + std::to_string(c) + "\n";
  for (const auto& [d, c] : hist.out) degrees += "out," + std::to_string(d) + "," + std::to_string(c) + "\n";

  write_atomic(dir / "graph.nodes.jsonl", nodes.str());
  write_atomic(dir / "graph.edges.tsv", edges.str());
  write_atomic(dir / "degree_histogram.csv", degrees);
  write_atomic(dir / "ingest.json", report.dump(2) + "\n");
  rec.params() = {{"pos", p.pos}, {"first_sense", p.first_sense}};
  rec.commit();
}

inline SampledCoreOptions sampled_options(const Params& p, std::size_t node_count) {
  if (p.sample > node_count)
    throw ParamError("sample " + std::to_string(p.sample) + " exceeds node count " + std::to_string(node_count));
  return {p.sample, p.seed, p.threshold, p.degeneracy, p.max_depth};
}

inline void run_core(const fs::path& dir, const Params& p) {
  validate(p);
  const DictGraph g = load_graph(dir);
  StageRecord rec(dir, "core", p);
  const CoreSet sampled = sampled_core(g, sampled_options(p, g.node_count()));
  CoreSet core = sampled;
  if (p.exact) core = exact_core(g, {p.coverage, p.memory_cap_mb << 20});

  json j;
  j["method"] = p.exact ? "exact" : "sampled";
  j["node_count"] = g.node_count();
  j["member_count"] = core.members.size();
  auto& members = j["members"] = json::array();
  for (NodeId v : core.members) members.push_back(g.node(v).key);
  auto& samples = j["samples"] = json::array();
  std::string csv = "start_id,distance,cumulative\n";
  for (const auto& s : sampled.sample_stats) {
    samples.push_back({{"id", g.node(s.start).key},
                       {"descendants", s.descendant_count},
                       {"degenerate", s.degenerate},
                       {"half_height_distance", s.profile.half_height_distance},
                       {"saturation_distance", s.profile.saturation_distance},
                       {"saturated", s.profile.saturated}});
    for (std::size_t d = 0; d < s.profile.cumulative.size(); ++d)
      csv += g.node(s.start).key + "," + std::to_string(d) + "," + std::to_string(s.profile.cumulative[d]) + "\n";
  }
  auto& degenerate = j["degenerate_samples"] = json::array();
  for (NodeId v : sampled.degenerate_samples) degenerate.push_back(g.node(v).key);

  write_atomic(dir / "core.json", j.dump(2) + "\n");
  write_atomic(dir / "convergence.csv", csv);
  rec.params() = {{"sample", p.sample},   {"seed", p.seed},         {"threshold", p.threshold},
                  {"degeneracy", p.degeneracy}, {"max_depth", p.max_depth}, {"exact", p.exact},
                  {"coverage", p.coverage}};
  rec.commit();
}

inline std::vector<NodeId> scope_nodes(const fs::path& dir, const Params& p, const DictGraph& g) {
  if (p.scope == "core") return load_core(dir, g);
  std::vector<NodeId> all(g.node_count());
  std::iota(all.begin(), all.end(), NodeId{0});
  return all;
}

inline GirthOptions girth_options(const Params& p, std::vector<NodeId> scope) {
  GirthOptions opt{std::move(scope), std::nullopt};
  if (p.max_probe_depth) opt.max_probe_depth = p.max_probe_depth;
  return opt;
}

inline std::string histogram_rows(const LoopHistogram& h, const std::string& source) {
  std::string out;
  for (const auto& [len, c] : h.counts) out += std::to_string(len) + "," + std::to_string(c) + "," + source + "\n";
  out += "inf," + std::to_string(h.acyclic_edges) + "," + source + "\n";
  return out;
}

struct RandomizedScope {
  RandomizeResult result;
  std::vector<NodeId> scope;
  std::string warning;
};

/// Randomizes the scope-induced subgraph, or the whole graph followed by
/// re-deriving its core when randomize_full is set.
inline RandomizedScope randomized_scope(const DictGraph& g, const std::vector<NodeId>& scope, const Params& p,
                                        std::uint64_t seed) {
  RandomizedScope out;
  const RandomizeOptions opt{p.swap_factor, seed, p.max_attempts_factor};
  if (!p.randomize_full) {
    out.result = randomize_degree_preserving(induced_subgraph(g, scope), opt);
    out.scope = scope;
    return out;
  }
  out.result = randomize_degree_preserving(g, opt);
  if (p.scope == "all") {
    out.scope.resize(g.node_count());
    std::iota(out.scope.begin(), out.scope.end(), NodeId{0});
    return out;
  }
  try {
    out.scope = sampled_core(out.result.graph, sampled_options(p, g.node_count())).members;
  } catch (const NoCoreError& e) {
    out.warning = e.what();
  }
  return out;
}

inline void run_loops(const fs::path& dir, const Params& p) {
  validate(p);
  const DictGraph g = load_graph(dir);
  StageRecord rec(dir, "loops", p);
  const auto scope = scope_nodes(dir, p, g);

  const auto girths = edge_girth(g, girth_options(p, scope));
  std::string girth_csv = "src_id,dst_id,girth\n";
  for (std::size_t i = 0; i < girths.edges.size(); ++i)
    girth_csv += g.node(girths.edges[i].src).key + "," + g.node(girths.edges[i].dst).key + "," +
                 (girths.girth[i] == no_cycle ? std::string("inf") : std::to_string(girths.girth[i])) + "\n";
  const auto real = loop_histogram(girths);
  std::string hist_csv = "loop_length,edge_count,source\n" + histogram_rows(real, "real");

  json summary;
  const auto looped = nodes_in_loops(g);
  summary["nodes_in_loops"] = looped.size();
  const auto scoped_loops = nodes_in_loops(induced_subgraph(g, scope));
  summary["scope_nodes"] = scope.size();
  summary["scope_nodes_in_loops"] = scoped_loops.size();
  summary["scope_edges"] = girths.edges.size();
  summary["short_loop_edges"] = real.at_most(5);
  auto& sources = summary["randomized"] = json::array();
  for (auto seed : p.randomized_seeds) {
    const auto r = randomized_scope(g, scope, p, seed);
    const auto h = loop_histogram(edge_girth(r.result.graph, girth_options(p, r.scope)));
    hist_csv += histogram_rows(h, "randomized:" + std::to_string(seed));
    sources.push_back({{"seed", seed},
                       {"swaps", r.result.swaps},
                       {"target_swaps", r.result.target_swaps},
                       {"scope_nodes", r.scope.size()},
                       {"short_loop_edges", h.at_most(5)},
                       {"warning", r.result.warning.empty() ? r.warning : r.result.warning}});
  }
  write_atomic(dir / "girth.csv", girth_csv);
  write_atomic(dir / "loop_histogram.csv", hist_csv);
  write_atomic(dir / "loops.json", summary.dump(2) + "\n");
  rec.params() = {{"scope", p.scope},
                  {"randomized_seeds", p.randomized_seeds},
                  {"swap_factor", p.swap_factor},
                  {"max_attempts_factor", p.max_attempts_factor},
                  {"max_probe_depth", p.max_probe_depth},
                  {"randomize_full", p.randomize_full}};
  rec.commit();
}

inline void run_randomize(const fs::path& dir, const Params& p) {
  validate(p);
  if (p.randomized_seeds.empty()) throw ParamError("randomize needs --randomized-seeds");
  const DictGraph g = load_graph(dir);
  StageRecord rec(dir, "randomize", p);
  const auto scope = scope_nodes(dir, p, g);
  for (auto seed : p.randomized_seeds) {
    const auto r = randomized_scope(g, scope, p, seed);
    std::ostringstream edges;
    write_edge_list(edges, r.result.graph);
    json info = {{"seed", seed},
                 {"swaps", r.result.swaps},
                 {"target_swaps", r.result.target_swaps},
                 {"attempts", r.result.attempts},
                 {"exhausted", r.result.exhausted},
                 {"warning", r.result.warning}};
    write_atomic(dir / ("randomized_" + std::to_string(seed) + ".edges.tsv"), edges.str());
    write_atomic(dir / ("randomized_" + std::to_string(seed) + ".json"), info.dump(2) + "\n");
  }
  rec.params() = {{"scope", p.scope},
                  {"randomized_seeds", p.randomized_seeds},
                  {"swap_factor", p.swap_factor},
                  {"max_attempts_factor", p.max_attempts_factor},
                  {"randomize_full", p.randomize_full}};
  rec.commit();
}

inline void run_decompose(const fs::path& dir, const Params& p) {
  validate(p);
  const DictGraph g = load_graph(dir);
  StageRecord rec(dir, "decompose", p);
  const auto core = load_core(dir, g);
  const auto cs = decompose_core(g, core, {p.filter_length, p.refine_threshold, p.refine_length, p.refine_fixpoint});
  std::ostringstream dot, text;
  write_components_dot(dot, cs, g);
  write_component_report(text, component_report(cs, g));
  write_atomic(dir / "components.json", components_json(cs, g).dump(1) + "\n");
  write_atomic(dir / "components.dot", dot.str());
  write_atomic(dir / "components.txt", text.str());
  rec.params() = {{"filter_length", p.filter_length},
                  {"refine_threshold", p.refine_threshold},
                  {"refine_length", p.refine_length},
                  {"refine_fixpoint", p.refine_fixpoint}};
  rec.commit();
}

inline void run_paths(const fs::path& dir, const Params& p) {
  validate(p);
  const DictGraph g = load_graph(dir);
  StageRecord rec(dir, "paths", p);
  const auto cs = load_components(dir, g);
  const auto w = prune_ubiquitous(walk_counts(g, cs, p.max_len), p.prune);
  write_atomic(dir / "walk_matrix.txt", write_walk_matrix(w, p.prune));
  rec.params() = {{"max_len", p.max_len}, {"prune", p.prune}};
  rec.commit();
}

inline void run_svd(const fs::path& dir, const Params& p) {
  validate(p);
  const DictGraph g = load_graph(dir);
  StageRecord rec(dir, "svd", p);
  const auto cs = load_components(dir, g);
  const auto w = load_walk_matrix(dir);
  const std::size_t k = std::min({p.k, w.rows, w.cols()});
  json info;
  if (k < p.k) info["notice"] = "k reduced from " + std::to_string(p.k) + " to " + std::to_string(k);
  std::string values = "index,singular_value\n", vectors = "vector_index,component_id,coefficient\n";
  std::ostringstream themes_text;
  if (k > 0) {
    const auto res = svd_topk(w, k, p.column_scale);
    if (!res.notice.empty()) info["rank_notice"] = res.notice;
    for (std::size_t j = 0; j < res.k; ++j) {
      values += std::to_string(j + 1) + "," + num(res.singular_values[j]) + "\n";
      for (Eigen::Index i = 0; i < res.right_vectors.rows(); ++i)
        vectors += std::to_string(j + 1) + "," + std::to_string(res.column_ids[static_cast<std::size_t>(i)]) + "," +
                   num(res.right_vectors(i, static_cast<Eigen::Index>(j))) + "\n";
    }
    std::unordered_map<std::uint32_t, const Component*> by_id;
    for (const auto& c : cs.components) by_id.emplace(c.id, &c);
    write_theme_report(themes_text, theme_report(res, p.coeff_threshold, p.top_n), [&](std::uint32_t id) {
      return "component " + std::to_string(id) + " (" + component_label(g, *by_id.at(id)) + ")";
    });
    info["k"] = res.k;
  }
  write_atomic(dir / "singular_values.csv", values);
  write_atomic(dir / "right_vectors.csv", vectors);
  write_atomic(dir / "themes.txt", themes_text.str());
  write_atomic(dir / "svd.json", info.dump(2) + "\n");
  rec.params() = {{"k", p.k}, {"column_scale", p.column_scale}, {"coeff_threshold", p.coeff_threshold}, {"top_n", p.top_n}};
  rec.commit();
}

inline void run_etym(const fs::path& dir, const Params& p) {
  validate(p);
  if (p.dates.empty()) throw ParamError("etym needs --dates");
  const DictGraph g = load_graph(dir);
  StageRecord rec(dir, "etym", p);
  rec.input("dates", require_file(p.dates));
  const auto cs = load_components(dir, g);
  const auto dates = parse_dates(p.dates);
  const auto comps = attach_dates(cs, dates, [&](NodeId v) { return g.node(v).word(); });
  const auto stats = component_date_stats(comps);

  std::vector<int> pool;
  std::vector<std::size_t> profile;
  for (const auto& c : comps)
    if (c.years.size() >= 2) {
      pool.insert(pool.end(), c.years.begin(), c.years.end());
      profile.push_back(c.years.size());
    }
  std::string summary = "component_id,n,median_pairwise_distance,mean_year\n";
  for (const auto& s : stats)
    summary += std::to_string(s.component_id) + "," + std::to_string(s.n) + "," + num(s.median_pairwise_distance) + "," +
               num(s.mean_year) + "\n";
  std::string baseline_csv = "trial,pseudo_component,median_pairwise_distance\n";
  json info;
  ExclusionTally total;
  std::size_t dated = 0;
  for (const auto& c : comps) {
    total.proper_noun += c.excluded.proper_noun;
    total.compound += c.excluded.compound;
    total.polysemous += c.excluded.polysemous;
    total.no_date += c.excluded.no_date;
    dated += c.years.size();
  }
  info["dated_words"] = dated;
  info["components_with_dates"] = stats.size();
  info["excluded"] = {{"proper_noun", total.proper_noun},
                      {"compound", total.compound},
                      {"polysemous", total.polysemous},
                      {"no_date", total.no_date}};
  if (!profile.empty()) {
    const auto base = random_baseline(pool, profile, p.trials, p.seed);
    for (const auto& s : base.samples)
      baseline_csv += std::to_string(s.trial) + "," + std::to_string(s.pseudo_component) + "," +
                      num(s.median_pairwise_distance) + "\n";
    std::vector<double> real, null;
    for (std::size_t i = 0; i < stats.size(); ++i) {
      real.push_back(stats[i].median_pairwise_distance);
      null.push_back(base.pseudo_component_median(i));
    }
    const auto test = sign_test(real, null);
    info["sign_test"] = {{"below", test.below}, {"above", test.above}, {"ties", test.ties}, {"p_value", test.p_value}};
    info["baseline_quantiles"] = {{"q05", base.quantile(0.05)}, {"q25", base.quantile(0.25)}, {"q50", base.quantile(0.5)},
                                  {"q75", base.quantile(0.75)}, {"q95", base.quantile(0.95)}};
  }
  const auto hist = mean_dates(comps, p.bin_width);
  std::string hist_csv = "bin_start,bin_end,components\n";
  for (const auto& [start, count] : hist.bins)
    hist_csv += std::to_string(start) + "," + std::to_string(start + p.bin_width) + "," + std::to_string(count) + "\n";

  write_atomic(dir / "etymology_summary.csv", summary);
  write_atomic(dir / "etymology_baseline.csv", baseline_csv);
  write_atomic(dir / "mean_dates.csv", hist_csv);
  write_atomic(dir / "etymology.json", info.dump(2) + "\n");
  rec.params() = {{"trials", p.trials}, {"seed", p.seed}, {"bin_width", p.bin_width}};
  rec.commit();
}

inline void run_report(const fs::path& dir, const Params& p) {
  validate(p);
  const DictGraph g = load_graph(dir);
  StageRecord rec(dir, "report", p);
  const fs::path out = dir / "report";
  const auto copy = [&](const std::string& from, const std::string& to) {
    write_atomic(out / to, read_file(require_file(dir / from)));
  };
  copy("convergence.csv", "convergence.csv");
  {
    const auto core = json::parse(read_file(dir / "core.json"));
    std::string csv = "start_id,descendants,degenerate,half_height_distance,saturation_distance\n";
    for (const auto& s : core.at("samples"))
      csv += s.at("id").get<std::string>() + "," + std::to_string(s.at("descendants").get<std::size_t>()) + "," +
             (s.at("degenerate").get<bool>() ? "1" : "0") + "," +
             std::to_string(s.at("half_height_distance").get<std::size_t>()) + "," +
             std::to_string(s.at("saturation_distance").get<std::size_t>()) + "\n";
    write_atomic(out / "half_height.csv", csv);
  }
  copy("loop_histogram.csv", "loop_histogram.csv");
  copy("components.txt", "components.txt");
  copy("components.dot", "components.dot");
  std::string notes;
  if (fs::exists(dir / "themes.txt")) copy("themes.txt", "themes.txt");
  else notes += "themes.txt: svd stage not run\n";
  if (fs::exists(dir / "etymology_summary.csv")) {
    copy("etymology_summary.csv", "pairwise_distance.csv");
    copy("etymology_baseline.csv", "pairwise_baseline.csv");
    copy("mean_dates.csv", "mean_dates.csv");
  } else {
    notes += "dates: etym stage not run\n";
  }
  if (!p.wordlists.empty()) {
    std::vector<WordList> lists;
    for (const auto& path : p.wordlists) {
      rec.input("wordlist:" + fs::path(path).stem().string(), require_file(path));
      lists.push_back(parse_word_list(path, fs::path(path).stem().string()));
    }
    const auto table = wordlist_overlap(core_word_list(g, load_core(dir, g)), lists);
    std::string csv = "row_list,col_list,count,percent\n";
    for (std::size_t i = 0; i < table.names.size(); ++i)
      csv += table.names[i] + "," + table.names[i] + "," + std::to_string(table.sizes[i]) + ",100\n";
    for (const auto& c : table.cells)
      csv += table.names[c.row] + "," + table.names[c.col] + "," + std::to_string(c.count) + "," +
             std::to_string(c.percent) + "\n";
    write_atomic(out / "wordlist_overlap.csv", csv);
  } else {
    notes += "wordlist_overlap.csv: no word lists given\n";
  }
  if (!notes.empty()) write_atomic(out / "NOTES.txt", notes);
  std::vector<std::string> names;
  for (const auto& p2 : p.wordlists) names.push_back(fs::path(p2).filename().string());
  rec.params() = {{"wordlists", names}};
  rec.commit();
}

/// Every stage in order; etymology only when a dates file is given.
inline void run_all(const fs::path& dir, const Params& p) {
  run_ingest(dir, p);
  run_core(dir, p);
  run_loops(dir, p);
  if (!p.randomized_seeds.empty()) run_randomize(dir, p);
  run_decompose(dir, p);
  run_paths(dir, p);
  run_svd(dir, p);
  if (!p.dates.empty()) run_etym(dir, p);
  run_report(dir, p);
}

}  // namespace dictloops::pipeline
