#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dictloops/fixture.hpp"
#include "dictloops/pipeline.hpp"
#include "oracles.hpp"

using namespace dictloops;
namespace fs = std::filesystem;
namespace pl = dictloops::pipeline;

namespace {

const fs::path source_dir = DICTLOOPS_SOURCE_DIR;
const std::string cli = DICTLOOPS_CLI;

fs::path scratch_root() { return fs::temp_directory_path() / ("dictloops_test_" + std::to_string(::getpid())); }

struct RemoveScratch : ::testing::Environment {
  void TearDown() override { fs::remove_all(scratch_root()); }
};
const auto* const remove_scratch = ::testing::AddGlobalTestEnvironment(new RemoveScratch);

fs::path scratch(const std::string& name) {
  const fs::path dir = scratch_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code = -1;
  std::string output;
};

/// Runs the CLI from the source directory so relative input paths are stable.
Run run_cli(const std::string& args) {
  const fs::path log = scratch("cli_log") / "out.txt";
  const std::string cmd = "cd '" + source_dir.string() + "' && '" + cli + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = pl::read_file(log);
  return r;
}

std::string fixture_args() {
  return "--gloss data/fixture/gloss.xwn --dates data/fixture/dates.tsv "
         "--wordlists data/fixture/lists/basic.txt,data/fixture/lists/kanji.txt,data/fixture/lists/gutenberg.txt "
         "--randomized-seeds 1,2,3 --trials 200";
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = pl::read_file(entry.path());
  return files;
}

}  // namespace

TEST(Pipeline, BundledFixtureMatchesGenerator) {
  // the committed fixture is exactly what the generator writes
  const fs::path dir = scratch("regenerated");
  const FixtureOptions opt;
  write_fixture(dir, generate_fixture(opt), opt);
  const auto fresh = tree(dir);
  const auto bundled = tree(source_dir / "data" / "fixture");
  ASSERT_EQ(fresh.size(), bundled.size());
  for (const auto& [name, content] : fresh) EXPECT_TRUE(bundled.at(name) == content) << name;
}

TEST(Pipeline, StagesRecoverPlantedStructure) {
  const fs::path dir = scratch("stages");
  const fs::path fx = source_dir / "data" / "fixture";
  const auto manifest = nlohmann::json::parse(pl::read_file(fx / "manifest.json"));
  pl::Params p;
  p.gloss = (fx / "gloss.xwn").string();
  p.dates = (fx / "dates.tsv").string();
  p.trials = 100;
  p.randomized_seeds = {1};
  pl::run_all(dir, p);

  const auto g = pl::load_graph(dir);
  EXPECT_EQ(g.node_count(), manifest.at("noun_nodes").get<std::size_t>());
  EXPECT_EQ(g.edge_count(), manifest.at("noun_edges").get<std::size_t>());

  std::vector<std::string> core;
  for (NodeId v : pl::load_core(dir, g)) core.push_back(g.node(v).key);
  auto closure = manifest.at("closure").get<std::vector<std::string>>();
  std::sort(core.begin(), core.end());
  std::sort(closure.begin(), closure.end());
  EXPECT_EQ(core, closure);

  // girth.csv agrees with 1 + shortest return path inside the core
  const auto members = pl::load_core(dir, g);
  const auto sub = induced_subgraph(g, members);
  const auto idx = pl::key_index(g);
  std::istringstream girths(pl::read_file(dir / "girth.csv"));
  std::string line;
  std::getline(girths, line);
  std::size_t checked = 0;
  while (std::getline(girths, line) && checked < 200) {
    const auto a = line.find(','), b = line.rfind(',');
    const NodeId u = idx.at(line.substr(0, a)), v = idx.at(line.substr(a + 1, b - a - 1));
    // BFS v -> u in the core subgraph
    std::vector<std::uint32_t> dist(g.node_count(), no_cycle);
    std::vector<NodeId> queue{v};
    dist[v] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (NodeId w : sub.out(queue[h]))
        if (dist[w] == no_cycle) dist[w] = dist[queue[h]] + 1, queue.push_back(w);
    EXPECT_EQ(line.substr(b + 1), dist[u] == no_cycle ? "inf" : std::to_string(dist[u] + 1));
    ++checked;
  }

  // the five named clusters come out as components
  const auto cs = pl::load_components(dir, g);
  std::set<std::set<std::string>> found;
  for (const auto& c : cs.components) {
    std::set<std::string> words;
    for (NodeId v : c.members) words.insert(g.node(v).word());
    found.insert(words);
  }
  for (const auto& cluster : manifest.at("clusters")) {
    std::set<std::string> words;
    for (const auto& key : cluster) words.insert(g.node(idx.at(key.get<std::string>())).word());
    if (words.contains("emotion") || words.contains("winner")) { EXPECT_TRUE(found.contains(words)); }
  }
  const auto etym = nlohmann::json::parse(pl::read_file(dir / "etymology.json"));
  EXPECT_LT(etym.at("sign_test").at("p_value").get<double>(), 0.01);
  EXPECT_TRUE(fs::exists(dir / "report" / "loop_histogram.csv"));
  EXPECT_TRUE(fs::exists(dir / "report" / "NOTES.txt"));  // no word lists given
}

TEST(Pipeline, MissingUpstreamArtifactIsExitTwo) {
  const fs::path dir = scratch("missing");
  const auto r = run_cli("core --out '" + dir.string() + "'");
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find((dir / "graph.nodes.jsonl").string()), std::string::npos) << r.output;
  EXPECT_THROW(pl::run_decompose(dir, {}), pl::MissingArtifact);
  const auto gone = run_cli("ingest --out '" + dir.string() + "' --gloss no/such/file.xwn");
  EXPECT_EQ(gone.code, 2) << gone.output;
  EXPECT_NE(gone.output.find("no/such/file.xwn"), std::string::npos);
}

TEST(Pipeline, ParameterOutOfRangeIsExitThree) {
  const fs::path dir = scratch("params");
  ASSERT_EQ(run_cli("ingest --out '" + dir.string() + "' --gloss data/fixture/gloss.xwn").code, 0);
  for (const std::string bad : {"core --threshold 1.5", "core --threshold 0", "decompose --filter-length 1",
                                "paths --prune 0", "core --sample 999999", "ingest --pos q --gloss data/fixture/gloss.xwn"}) {
    const auto r = run_cli(bad + " --out '" + dir.string() + "'");
    EXPECT_EQ(r.code, 3) << bad << ": " << r.output;
  }
  EXPECT_THROW(pl::validate([] { pl::Params p; p.k = 0; return p; }()), pl::ParamError);
}

TEST(Pipeline, CoreCommandWritesJsonAndConvergence) {
  const fs::path dir = scratch("core_cmd");
  ASSERT_EQ(run_cli("ingest --out '" + dir.string() + "' --gloss data/fixture/gloss.xwn").code, 0);
  const auto r = run_cli("core --sample 100 --seed 7 --out '" + dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto core = nlohmann::json::parse(pl::read_file(dir / "core.json"));
  EXPECT_EQ(core.at("samples").size(), 100u);
  std::istringstream csv(pl::read_file(dir / "convergence.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "start_id,distance,cumulative");
}

TEST(Pipeline, LoopsWithThreeNullModelsHasFourSources) {
  const fs::path dir = scratch("loops_cmd");
  ASSERT_EQ(run_cli("ingest --out '" + dir.string() + "' --gloss data/fixture/gloss.xwn").code, 0);
  ASSERT_EQ(run_cli("core --out '" + dir.string() + "'").code, 0);
  const auto r = run_cli("loops --scope core --randomized-seeds 1,2,3 --out '" + dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.output;
  std::set<std::string> sources;
  std::istringstream csv(pl::read_file(dir / "loop_histogram.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) sources.insert(line.substr(line.rfind(',') + 1));
  EXPECT_EQ(sources, (std::set<std::string>{"real", "randomized:1", "randomized:2", "randomized:3"}));
}

TEST(Pipeline, ConfigFileMirrorsFlags) {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "run.cfg") << "# settings\ngloss = data/fixture/gloss.xwn\nsample = 50\nseed = 3\nexact = true\n"
                                    "filter-length = 4\n";
  ASSERT_EQ(run_cli("--config '" + (dir / "run.cfg").string() + "' ingest --out '" + dir.string() + "'").code, 0);
  const auto r = run_cli("core --config '" + (dir / "run.cfg").string() + "' --seed 9 --out '" + dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto m = nlohmann::json::parse(pl::read_file(dir / "manifest.json"));
  EXPECT_EQ(m["stages"]["core"]["sample"], 50);
  EXPECT_EQ(m["stages"]["core"]["seed"], 9);  // explicit flag wins
  EXPECT_EQ(m["stages"]["core"]["exact"], true);
  std::ofstream(dir / "bad.cfg") << "sample\n";
  EXPECT_EQ(run_cli("core --config '" + (dir / "bad.cfg").string() + "' --out '" + dir.string() + "'").code, 3);
  EXPECT_EQ(run_cli("core --config '" + (dir / "none.cfg").string() + "' --out '" + dir.string() + "'").code, 2);
}

TEST(Pipeline, FormatSwitchesSummary) {
  const fs::path dir = scratch("format");
  const auto csv = run_cli("ingest --format csv --out '" + dir.string() + "' --gloss data/fixture/gloss.xwn");
  EXPECT_NE(csv.output.find("\nnodes,"), std::string::npos) << csv.output;
  const auto js = run_cli("ingest --format json --out '" + dir.string() + "' --gloss data/fixture/gloss.xwn");
  EXPECT_NE(js.output.find("\"nodes\": "), std::string::npos) << js.output;
}

TEST(Pipeline, EdgeListInputMatchesGlossInput) {
  const fs::path a = scratch("from_gloss"), b = scratch("from_edges");
  ASSERT_EQ(run_cli("ingest --out '" + a.string() + "' --gloss data/fixture/gloss.xwn").code, 0);
  const auto r = run_cli("ingest --out '" + b.string() + "' --nodes '" + (a / "graph.nodes.jsonl").string() +
                         "' --edges '" + (a / "graph.edges.tsv").string() + "'");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(pl::read_file(a / "graph.edges.tsv"), pl::read_file(b / "graph.edges.tsv"));
  EXPECT_EQ(pl::read_file(a / "graph.nodes.jsonl"), pl::read_file(b / "graph.nodes.jsonl"));
}

TEST(Pipeline, WalkMatrixRoundTrip) {
  WalkMatrix w;
  w.rows = 3;
  w.column_ids = {4, 9};
  w.row_offsets = {0, 2, 2, 3};
  w.col_index = {0, 1, 1};
  w.values = {5, 18446744073709551615ull, 2};
  w.pruned_components = {1};
  const fs::path dir = scratch("walk");
  pl::write_atomic(dir / "walk_matrix.txt", pl::write_walk_matrix(w, 0.8));
  const auto back = pl::load_walk_matrix(dir);
  EXPECT_EQ(back.row_offsets, w.row_offsets);
  EXPECT_EQ(back.col_index, w.col_index);
  EXPECT_EQ(back.values, w.values);
  EXPECT_EQ(back.column_ids, w.column_ids);
  EXPECT_EQ(back.pruned_components, w.pruned_components);
}

TEST(Pipeline, RerunIsByteIdentical) {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  ASSERT_EQ(run_cli("pipeline --out '" + a.string() + "' " + fixture_args()).code, 0);
  ASSERT_EQ(run_cli("pipeline --threads 3 --out '" + b.string() + "' " + fixture_args()).code, 0);
  EXPECT_TRUE(tree(a) == tree(b));
}

TEST(Pipeline, MatchesGoldenFiles) {
  const fs::path dir = scratch("golden");
  const auto r = run_cli("pipeline --out '" + dir.string() + "' " + fixture_args());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto got = tree(dir);
  const auto want = tree(source_dir / "tests" / "golden");
  ASSERT_FALSE(want.empty());
  std::set<std::string> got_names, want_names;
  for (const auto& [k, v] : got) got_names.insert(k);
  for (const auto& [k, v] : want) want_names.insert(k);
  EXPECT_EQ(got_names, want_names);
  for (const auto& [name, content] : want) {
    const auto it = got.find(name);
    if (it == got.end()) continue;
    EXPECT_TRUE(it->second == content) << name << " differs from the golden copy";
  }
}

