// Command-line driver for the dictionary-graph pipeline.
//
//   dictloops [--out DIR] [--config FILE] [--threads N] <command> [options]
//
// Commands: ingest core loops randomize decompose paths svd etym report
//           pipeline fixture
//
// Exit codes: 0 success, 1 other failure, 2 missing input or upstream
// artifact, 3 parameter out of range.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dictloops/fixture.hpp"
#include "dictloops/parallel.hpp"
#include "dictloops/pipeline.hpp"

namespace {

using dictloops::pipeline::Params;
namespace fs = std::filesystem;

void ingest_options(CLI::App* cmd, Params& p) {
  cmd->add_option("--gloss", p.gloss, "gloss file (synset TAB lemmas TAB pos TAB tokens)");
  cmd->add_option("--nodes", p.nodes, "node metadata, JSON lines (with --edges)");
  cmd->add_option("--edges", p.edges, "edge list, src_id TAB dst_id (with --nodes)");
  cmd->add_option("--pos", p.pos, "part-of-speech filter: n, v, a, r or all")->capture_default_str();
  cmd->add_flag("--first-sense", p.first_sense, "word-level graph using first senses only");
}

void core_options(CLI::App* cmd, Params& p) {
  cmd->add_option("--sample", p.sample, "number of sampled start words")->capture_default_str();
  cmd->add_option("--seed", p.seed, "seed for sampling and the etymology baseline")->capture_default_str();
  cmd->add_option("--threshold", p.threshold, "membership fraction required for the core")->capture_default_str();
  cmd->add_option("--degeneracy", p.degeneracy, "closures smaller than this fraction of nodes are set aside")
      ->capture_default_str();
  cmd->add_option("--max-depth", p.max_depth, "depth of the convergence profiles")->capture_default_str();
  cmd->add_flag("--exact", p.exact, "deterministic core from ancestor counts");
  cmd->add_option("--coverage", p.coverage, "ancestor fraction for --exact")->capture_default_str();
  cmd->add_option("--memory-cap-mb", p.memory_cap_mb, "bitset budget for --exact")->capture_default_str();
}

void loops_options(CLI::App* cmd, Params& p) {
  cmd->add_option("--scope", p.scope, "core or all")->capture_default_str();
  cmd->add_option("--randomized-seeds", p.randomized_seeds, "seeds for degree-preserving null models")->delimiter(',');
  cmd->add_option("--swap-factor", p.swap_factor, "successful swaps per edge")->capture_default_str();
  cmd->add_option("--max-attempts-factor", p.max_attempts_factor, "attempt budget per target swap")
      ->capture_default_str();
  cmd->add_option("--max-probe-depth", p.max_probe_depth, "girth probe cap, 0 for none")->capture_default_str();
  cmd->add_flag("--randomize-full", p.randomize_full, "randomize the whole graph and re-derive its core");
}

void decompose_options(CLI::App* cmd, Params& p) {
  cmd->add_option("--filter-length", p.filter_length, "keep edges on loops up to this length")->capture_default_str();
  cmd->add_option("--refine-threshold", p.refine_threshold, "refine components larger than this")
      ->capture_default_str();
  cmd->add_option("--refine-length", p.refine_length, "loop length used when refining")->capture_default_str();
  cmd->add_flag("--refine-fixpoint", p.refine_fixpoint, "repeat refinement until nothing changes");
}

void paths_options(CLI::App* cmd, Params& p) {
  cmd->add_option("--max-len", p.max_len, "longest walk counted")->capture_default_str();
  cmd->add_option("--prune", p.prune, "drop components reached from more than this fraction of nodes")
      ->capture_default_str();
}

void svd_options(CLI::App* cmd, Params& p) {
  cmd->add_option("--k", p.k, "singular triplets")->capture_default_str();
  cmd->add_flag("--column-scale", p.column_scale, "scale columns to unit norm first");
  cmd->add_option("--coeff-threshold", p.coeff_threshold, "list coefficients above this magnitude")
      ->capture_default_str();
  cmd->add_option("--top-n", p.top_n, "components listed per vector")->capture_default_str();
}

void etym_options(CLI::App* cmd, Params& p) {
  cmd->add_option("--dates", p.dates, "dates file (word TAB year|OE [TAB flags])");
  cmd->add_option("--trials", p.trials, "random-clustering trials")->capture_default_str();
  cmd->add_option("--bin-width", p.bin_width, "mean-date histogram bin width in years")->capture_default_str();
}

void report_options(CLI::App* cmd, Params& p) {
  cmd->add_option("--wordlists", p.wordlists, "word lists compared against the core")->delimiter(',');
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dictloops::pipeline::MissingArtifact(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = dictloops::detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw dictloops::pipeline::ParamError("config line without '=': " + line);
    kv[std::string(dictloops::detail::trim(t.substr(0, eq)))] = std::string(dictloops::detail::trim(t.substr(eq + 1)));
  }
  return kv;
}

/// Config values become command-line arguments of the chosen subcommand,
/// placed before the user's own so explicit flags win.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
  std::string config;
  std::string command;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty()) return args;
  std::size_t pos = 0;
  for (; pos < args.size(); ++pos) {
    if (app.get_subcommand_no_throw(args[pos]) != nullptr) {
      command = args[pos];
      break;
    }
  }
  if (command.empty()) return args;
  CLI::App* sub = app.get_subcommand(command);
  std::set<std::string> given;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config(config)) {
    if (given.contains(key)) continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") injected.push_back("--" + key);
    } else {
      injected.push_back("--" + key + "=" + value);
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos) + 1, injected.begin(), injected.end());
  return args;
}

void print_summary(const fs::path& file, const std::string& format) {
  if (!fs::exists(file)) return;
  const auto j = nlohmann::json::parse(dictloops::pipeline::read_file(file));
  if (format == "json") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : j.items())
    if (value.is_primitive()) std::cout << key << ',' << value.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dictionary definition-graph analysis: core, loops, components, themes, etymology"};
  app.require_subcommand(1);
  app.fallthrough();
  Params p;
  std::string out = ".";
  std::string config;
  std::string format = "csv";
  std::size_t threads = 0;
  app.add_option("--out", out, "working directory for artifacts")->capture_default_str();
  app.add_option("--config", config, "key=value file mirroring the long flags");
  app.add_option("--threads", threads, "worker cap, 0 for all cores")->capture_default_str();
  app.add_option("--format", format, "stdout summary format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "parse a dictionary into the graph artifact");
  ingest_options(ingest, p);
  auto* core = app.add_subcommand("core", "sample descendant sets and extract the core");
  core_options(core, p);
  auto* loops = app.add_subcommand("loops", "edge girths, loop histogram and null models");
  loops_options(loops, p);
  core_options(loops, p);  // --randomize-full re-derives cores
  auto* randomize = app.add_subcommand("randomize", "write degree-preserving randomized graphs");
  loops_options(randomize, p);
  core_options(randomize, p);
  auto* decompose = app.add_subcommand("decompose", "split the core into short-loop components");
  decompose_options(decompose, p);
  auto* paths = app.add_subcommand("paths", "walk-count matrix from nodes into components");
  paths_options(paths, p);
  auto* svd = app.add_subcommand("svd", "singular vectors of the walk-count matrix");
  svd_options(svd, p);
  auto* etym = app.add_subcommand("etym", "date-of-origin statistics per component");
  etym_options(etym, p);
  core_options(etym, p);
  auto* report = app.add_subcommand("report", "bundle plot-ready tables into report/");
  report_options(report, p);
  auto* all = app.add_subcommand("pipeline", "run every stage");
  ingest_options(all, p);
  core_options(all, p);
  loops_options(all, p);
  decompose_options(all, p);
  paths_options(all, p);
  svd_options(all, p);
  etym_options(all, p);
  report_options(all, p);
  for (auto* cmd : {ingest, core, loops, randomize, decompose, paths, svd, etym, report, all})
    cmd->add_flag("--timings", p.timings, "record stage timings in the manifest (breaks byte-identical reruns)");

  dictloops::FixtureOptions fixture_opt;
  auto* fixture = app.add_subcommand("fixture", "write the synthetic planted-structure dictionary");
  fixture->add_option("--fixture-seed", fixture_opt.seed, "generator seed")->capture_default_str();
  fixture->add_option("--nouns", fixture_opt.nouns, "noun synsets")->capture_default_str();
  fixture->add_option("--closure", fixture_opt.closure_target, "approximate core size")->capture_default_str();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const dictloops::pipeline::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const dictloops::pipeline::ParamError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }

  dictloops::thread_limit() = threads;
  const fs::path dir = out;
  namespace pl = dictloops::pipeline;
  try {
    fs::create_directories(dir);
    if (*fixture) {
      if (fixture_opt.nouns < fixture_opt.closure_target + 100) throw pl::ParamError("--nouns must exceed --closure by 100");
      const auto fx = dictloops::generate_fixture(fixture_opt);
      dictloops::write_fixture(dir, fx, fixture_opt);
      std::cout << "fixture: " << fx.records.size() << " records written to " << dir.string() << '\n';
    } else if (*ingest) {
      pl::run_ingest(dir, p);
      print_summary(dir / "ingest.json", format);
    } else if (*core) {
      pl::run_core(dir, p);
      std::cout << "core: " << nlohmann::json::parse(pl::read_file(dir / "core.json")).at("member_count") << " members\n";
    } else if (*loops) {
      pl::run_loops(dir, p);
      print_summary(dir / "loops.json", format);
    } else if (*randomize) {
      pl::run_randomize(dir, p);
      for (auto seed : p.randomized_seeds) print_summary(dir / ("randomized_" + std::to_string(seed) + ".json"), format);
    } else if (*decompose) {
      pl::run_decompose(dir, p);
      std::cout << "decompose: "
                << nlohmann::json::parse(pl::read_file(dir / "components.json")).at("components").size()
                << " components\n";
    } else if (*paths) {
      pl::run_paths(dir, p);
      std::cout << "paths: wrote " << (dir / "walk_matrix.txt").string() << '\n';
    } else if (*svd) {
      pl::run_svd(dir, p);
      print_summary(dir / "svd.json", format);
    } else if (*etym) {
      pl::run_etym(dir, p);
      print_summary(dir / "etymology.json", format);
    } else if (*report) {
      pl::run_report(dir, p);
      std::cout << "report: wrote " << (dir / "report").string() << '\n';
    } else if (*all) {
      pl::run_all(dir, p);
      std::cout << "pipeline: artifacts in " << dir.string() << '\n';
    }
  } catch (const pl::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pl::ParamError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
