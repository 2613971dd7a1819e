#pragma once

// Synthetic dictionary with planted structure, used as the bundled fixture
// and by the end-to-end tests:
//
//  * an attracting closure made of short-loop clusters (2- to 5-cycles and
//    bidirectional chains) arranged on a ring, so the closure is strongly
//    connected only through long cycles;
//  * feeder words whose glosses lead into the closure, a few of them on
//    2-cycles of their own;
//  * small isolated definitional loops that never reach the closure;
//  * a handful of verb records, self-references and repeated tokens that
//    the noun graph must drop;
//  * origin dates clustered per planted cluster, and three word lists.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dictloops/ingest.hpp"
#include "dictloops/random.hpp"

namespace dictloops {

struct FixtureOptions {
  std::uint64_t seed = 2024;
  std::size_t nouns = 2000;
  std::size_t closure_target = 600;
  std::size_t verbs = 60;
  std::size_t isolated_loops = 6;
};

struct FixtureTruth {
  std::vector<std::string> closure;                // synset ids
  std::vector<std::vector<std::string>> clusters;  // planted short-loop clusters
  std::size_t noun_nodes = 0;
  std::size_t noun_edges = 0;       // distinct noun->noun links, no self-links
  std::size_t self_references = 0;  // tokens pointing at their own synset
  std::size_t repeated_links = 0;   // extra tokens repeating an existing link
  std::size_t cross_pos_links = 0;  // noun->verb or verb->noun tokens
};

struct Fixture {
  std::vector<GlossRecord> records;
  std::vector<DateRecord> dates;
  std::vector<WordList> word_lists;
  FixtureTruth truth;
};

namespace detail {

inline std::string fixture_word(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%04zu", i);
  return buf;
}

}  // namespace detail

inline Fixture generate_fixture(const FixtureOptions& opt = {}) {
  Rng rng(opt.seed);
  Fixture fx;

  // Five small clusters keep recognizable names; everything else is wNNNN.
  const std::vector<std::vector<std::string>> named = {
      {"emotion", "spirit", "dejection", "melancholy", "feeling"},
      {"height", "end", "dimension", "length"},
      {"bark", "trunk", "tree", "lumber"},
      {"injury", "violence", "accident"},
      {"winner", "contestant", "competition"},
  };
  std::vector<std::string> words;
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<bool> chain;  // bidirectional chain (else a directed cycle)
  for (const auto& group : named) {
    std::vector<std::size_t> members;
    for (const auto& w : group) {
      members.push_back(words.size());
      words.push_back(w);
    }
    clusters.push_back(members);
    chain.push_back(false);
  }
  bool planted_large = false;
  while (words.size() < opt.closure_target) {
    std::size_t size;
    bool is_chain;
    if (!planted_large) {
      size = 24;  // larger than the refinement threshold
      is_chain = true;
      planted_large = true;
    } else if (rng.below(2) == 0) {
      size = 2 + rng.below(4);  // 2..5
      is_chain = false;
    } else {
      size = 3 + rng.below(10);  // 3..12
      is_chain = true;
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < size; ++i) {
      members.push_back(words.size());
      words.push_back(detail::fixture_word(words.size()));
    }
    clusters.push_back(members);
    chain.push_back(is_chain);
  }
  const std::size_t closure_size = words.size();
  while (words.size() < opt.nouns) words.push_back(detail::fixture_word(words.size()));
  const std::size_t n = words.size();

  std::vector<std::set<std::size_t>> out(n);
  // cluster internals
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& m = clusters[c];
    if (chain[c]) {
      for (std::size_t i = 0; i + 1 < m.size(); ++i) {
        out[m[i]].insert(m[i + 1]);
        out[m[i + 1]].insert(m[i]);
      }
    } else {
      for (std::size_t i = 0; i < m.size(); ++i) out[m[i]].insert(m[(i + 1) % m.size()]);
    }
  }
  // ring of clusters: links only go forward 1..3 clusters, so any cycle
  // leaving a cluster has to go all the way around
  const std::size_t k = clusters.size();
  for (std::size_t c = 0; c < k; ++c) {
    const auto& from = clusters[c];
    out[from[rng.below(from.size())]].insert(clusters[(c + 1) % k][rng.below(clusters[(c + 1) % k].size())]);
    for (std::size_t step = 2; step <= 3; ++step)
      if (rng.below(3) == 0) {
        const auto& to = clusters[(c + step) % k];
        out[from[rng.below(from.size())]].insert(to[rng.below(to.size())]);
      }
  }
  // isolated loops at the tail of the noun range
  std::vector<std::vector<std::size_t>> isolated;
  std::size_t tail = n;
  for (std::size_t i = 0; i < opt.isolated_loops; ++i) {
    const std::size_t size = 2 + i % 2;
    std::vector<std::size_t> loop;
    for (std::size_t j = 0; j < size; ++j) loop.push_back(--tail);
    for (std::size_t j = 0; j < size; ++j) out[loop[j]].insert(loop[(j + 1) % size]);
    isolated.push_back(loop);
  }
  // feeders, each defined by the closure and earlier feeders
  for (std::size_t f = closure_size; f < tail; ++f) {
    const std::size_t degree = 1 + rng.below(4);
    out[f].insert(rng.below(closure_size));
    for (std::size_t d = 1; d < degree; ++d) out[f].insert(rng.below(f));
  }
  for (std::size_t f = closure_size; f + 1 < tail; f += 40) out[f].insert(f + 1), out[f + 1].insert(f);

  // Records. Gloss tokens: tagged links plus untagged filler words.
  const std::vector<std::string> filler = {"a", "the", "of", "that", "or", "which", "in"};
  auto key_of = [&](std::size_t i) { return words[i] + ".n.01"; };
  fx.truth.noun_nodes = n;
  std::size_t verb_count = opt.verbs;
  for (std::size_t u = 0; u < n; ++u) {
    GlossRecord rec;
    rec.synset_id = key_of(u);
    rec.lemmas = {words[u]};
    if (u % 17 == 0) rec.lemmas.push_back(words[u] + "_thing");
    rec.pos = PartOfSpeech::noun;
    for (std::size_t v : out[u]) {
      if (rng.below(3) == 0) rec.tokens.push_back({filler[rng.below(filler.size())], std::nullopt});
      rec.tokens.push_back({words[v], key_of(v)});
    }
    fx.truth.noun_edges += out[u].size();
    if (u % 97 == 0 && !out[u].empty()) {
      rec.tokens.push_back({words[*out[u].begin()], key_of(*out[u].begin())});
      ++fx.truth.repeated_links;
    }
    if (u % 101 == 0) {
      rec.tokens.push_back({words[u], key_of(u)});
      ++fx.truth.self_references;
    }
    if (u % 53 == 0 && verb_count > 0) {
      const std::size_t verb = rng.below(verb_count);
      rec.tokens.push_back({"do" + std::to_string(verb), "do" + std::to_string(verb) + ".v.01"});
      ++fx.truth.cross_pos_links;
    }
    fx.records.push_back(std::move(rec));
  }
  for (std::size_t v = 0; v < verb_count; ++v) {
    GlossRecord rec;
    rec.synset_id = "do" + std::to_string(v) + ".v.01";
    rec.lemmas = {"do" + std::to_string(v)};
    rec.pos = PartOfSpeech::verb;
    const std::size_t target = rng.below(n);
    rec.tokens = {{"make", std::nullopt}, {words[target], key_of(target)}};
    fx.records.push_back(std::move(rec));
  }
  // a second sense for some feeder words
  for (std::size_t f = closure_size; f < tail; f += 150) {
    GlossRecord rec;
    rec.synset_id = words[f] + ".n.02";
    rec.lemmas = {words[f]};
    rec.pos = PartOfSpeech::noun;
    const std::size_t target = rng.below(closure_size);
    rec.tokens = {{words[target], key_of(target)}};
    fx.records.push_back(std::move(rec));
    ++fx.truth.noun_nodes;
    ++fx.truth.noun_edges;
  }

  for (std::size_t i = 0; i < closure_size; ++i) fx.truth.closure.push_back(key_of(i));
  for (const auto& c : clusters) {
    std::vector<std::string> keys;
    for (std::size_t m : c) keys.push_back(key_of(m));
    fx.truth.clusters.push_back(std::move(keys));
  }

  // Dates: each cluster has an epoch, mostly 1300-1600 or 1800-1950, with
  // members within +-25 years; some clusters are Old English throughout.
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const std::uint64_t kind = rng.below(10);
    const bool old_english = kind == 0;
    int center = kind < 6 ? 1300 + static_cast<int>(rng.below(300)) : 1800 + static_cast<int>(rng.below(150));
    for (std::size_t m : clusters[c]) {
      const std::uint64_t roll = rng.below(20);
      if (roll == 0) continue;  // undated
      DateRecord d;
      d.word = fold_case(words[m]);
      d.year = old_english ? old_english_year : center - 25 + static_cast<int>(rng.below(51));
      if (roll == 1) d.flags = proper_noun;
      if (roll == 2) d.flags = compound;
      if (roll == 3) d.flags = polysemous;
      fx.dates.push_back(d);
    }
  }
  fx.dates.push_back({"shoe", old_english_year, 0});
  fx.dates.push_back({"sneaker", 1895, 0});

  // Word lists drawn partly from the closure.
  const std::vector<std::pair<std::string, std::size_t>> lists = {{"basic", 200}, {"kanji", 300}, {"gutenberg", 250}};
  for (const auto& [name, size] : lists) {
    WordList wl{name, {}};
    while (wl.words.size() < std::min(size, n / 4)) {
      const std::size_t i = rng.below(2) == 0 ? rng.below(closure_size) : rng.below(n);
      wl.words.insert(fold_case(words[i]));
    }
    fx.word_lists.push_back(std::move(wl));
  }
  return fx;
}

inline nlohmann::ordered_json fixture_manifest(const Fixture& fx, const FixtureOptions& opt) {
  nlohmann::ordered_json j;
  j["seed"] = opt.seed;
  j["records"] = fx.records.size();
  j["noun_nodes"] = fx.truth.noun_nodes;
  j["noun_edges"] = fx.truth.noun_edges;
  j["self_references"] = fx.truth.self_references;
  j["repeated_links"] = fx.truth.repeated_links;
  j["cross_pos_links"] = fx.truth.cross_pos_links;
  j["closure"] = fx.truth.closure;
  j["clusters"] = fx.truth.clusters;
  return j;
}

/// Writes gloss.xwn, dates.tsv, lists/<name>.txt and manifest.json.
inline void write_fixture(const std::filesystem::path& dir, const Fixture& fx, const FixtureOptions& opt) {
  std::filesystem::create_directories(dir / "lists");
  {
    std::ofstream out(dir / "gloss.xwn", std::ios::binary);
    out << "# synthetic dictionary, seed " << opt.seed << "\n";
    write_gloss_records(out, fx.records);
  }
  {
    std::ofstream out(dir / "dates.tsv", std::ios::binary);
    for (const auto& d : fx.dates) {
      out << d.word << '\t';
      if (d.year == old_english_year) out << "OE";
      else out << d.year;
      if (d.flags & proper_noun) out << "\tproper_noun";
      else if (d.flags & compound) out << "\tcompound";
      else if (d.flags & polysemous) out << "\tpolysemous";
      out << '\n';
    }
  }
  for (const auto& wl : fx.word_lists) {
    std::ofstream out(dir / "lists" / (wl.name + ".txt"), std::ios::binary);
    for (const auto& w : wl.words) out << w << '\n';
  }
  std::ofstream(dir / "manifest.json", std::ios::binary) << fixture_manifest(fx, opt).dump(2) << '\n';
}

}  // namespace dictloops
