#pragma once

// Readers and writers for dictionary sources:
//
//   gloss file   synset_id TAB lemma[,lemma...] TAB pos TAB token[ token...]
//                token = surface | surface%target_synset_id
//   word list    one word per line
//   dates        word TAB year|OE [TAB flag[,flag...]]
//   edge list    src_id TAB dst_id, with node metadata as JSON lines
//
// All formats are UTF-8 and treat lines starting with '#' as comments.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dictloops/graph.hpp"

namespace dictloops {

class IngestError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t end = s.find(sep, begin);
    parts.push_back(s.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
    if (end == std::string_view::npos) return parts;
    begin = end + 1;
  }
}

inline bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path);
  return in;
}

[[noreturn]] inline void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  throw IngestError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// ---------------------------------------------------------------------------
// Gloss records

struct GlossToken {
  std::string surface;
  std::optional<std::string> target;  // sense-tagged synset id
  friend bool operator==(const GlossToken&, const GlossToken&) = default;
};

struct GlossRecord {
  std::string synset_id;
  std::vector<std::string> lemmas;
  PartOfSpeech pos = PartOfSpeech::noun;
  std::vector<GlossToken> tokens;
  friend bool operator==(const GlossRecord&, const GlossRecord&) = default;
};

struct GlossParse {
  std::vector<GlossRecord> records;
  std::size_t unresolved_links = 0;
  std::vector<std::string> warnings;
};

/// Sense rank from a WordNet-style id ("bank.n.02" -> 2); 1 when absent.
inline std::uint32_t sense_rank_of(std::string_view synset_id) {
  const auto dot = synset_id.rfind('.');
  if (dot == std::string_view::npos || dot + 1 == synset_id.size()) return 1;
  std::uint32_t rank = 0;
  for (char c : synset_id.substr(dot + 1)) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return 1;
    rank = rank * 10 + static_cast<std::uint32_t>(c - '0');
    if (rank > 1000000) return 1;
  }
  return rank == 0 ? 1 : rank;
}

inline GlossParse parse_gloss_stream(std::istream& in, const std::string& source = "<gloss>") {
  GlossParse result;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skippable(line)) continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() < 3 || fields.size() > 4)
      detail::fail_at(source, line_no, "expected 3 or 4 tab-separated fields, got " + std::to_string(fields.size()));
    GlossRecord rec;
    rec.synset_id = std::string(detail::trim(fields[0]));
    if (rec.synset_id.empty()) detail::fail_at(source, line_no, "empty synset id");
    for (auto lemma : detail::split(detail::trim(fields[1]), ',')) {
      lemma = detail::trim(lemma);
      if (lemma.empty()) detail::fail_at(source, line_no, "empty lemma");
      rec.lemmas.emplace_back(lemma);
    }
    const auto pos = detail::trim(fields[2]);
    if (pos.empty()) detail::fail_at(source, line_no, "empty part of speech");
    rec.pos = parse_pos_tag(std::string(pos));
    if (fields.size() == 4) {
      std::istringstream words{std::string(detail::trim(fields[3]))};
      std::string token;
      while (words >> token) {
        const auto pct = token.rfind('%');
        if (pct == std::string::npos) {
          rec.tokens.push_back({token, std::nullopt});
          continue;
        }
        if (pct == 0 || pct + 1 == token.size())
          detail::fail_at(source, line_no, "malformed tagged token '" + token + "'");
        rec.tokens.push_back({token.substr(0, pct), token.substr(pct + 1)});
      }
    }
    if (!seen.emplace(rec.synset_id, line_no).second)
      detail::fail_at(source, line_no,
                      "duplicate synset id '" + rec.synset_id + "' (first seen on line " +
                          std::to_string(seen[rec.synset_id]) + ")");
    result.records.push_back(std::move(rec));
  }
  for (const auto& rec : result.records)
    for (const auto& tok : rec.tokens)
      if (tok.target && !seen.contains(*tok.target)) {
        ++result.unresolved_links;
        result.warnings.push_back(source + ":" + std::to_string(seen[rec.synset_id]) + ": unresolved target '" +
                                  *tok.target + "' in " + rec.synset_id);
      }
  return result;
}

inline GlossParse parse_gloss_file(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_gloss_stream(in, path);
}

inline void write_gloss_records(std::ostream& out, const std::vector<GlossRecord>& records) {
  for (const auto& rec : records) {
    out << rec.synset_id << '\t';
    for (std::size_t i = 0; i < rec.lemmas.size(); ++i) out << (i ? "," : "") << rec.lemmas[i];
    out << '\t' << pos_tag(rec.pos) << '\t';
    for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
      out << (i ? " " : "") << rec.tokens[i].surface;
      if (rec.tokens[i].target) out << '%' << *rec.tokens[i].target;
    }
    out << '\n';
  }
}

inline std::string gloss_text(const GlossRecord& rec) {
  std::string text;
  for (const auto& tok : rec.tokens) {
    if (!text.empty()) text += ' ';
    text += tok.surface;
  }
  return text;
}

struct LinkResult {
  BuildResult build;
  std::size_t unresolved_skipped = 0;  // target id not in the record set
  std::size_t filtered_skipped = 0;    // target rejected by the pos filter
};

/// Synset-level graph: an edge u->v for every resolved token of u's gloss
/// that targets v, restricted to records passing `pos_filter`.
inline LinkResult link_graph(const std::vector<GlossRecord>& records,
                             std::optional<PartOfSpeech> pos_filter = std::nullopt) {
  LinkResult result;
  std::unordered_map<std::string, std::size_t> record_index;
  for (std::size_t i = 0; i < records.size(); ++i) record_index.emplace(records[i].synset_id, i);

  std::vector<SenseNode> nodes;
  std::unordered_map<std::string, NodeId> node_of;
  for (const auto& rec : records) {
    if (pos_filter && rec.pos != *pos_filter) continue;
    node_of.emplace(rec.synset_id, static_cast<NodeId>(nodes.size()));
    nodes.push_back({rec.synset_id, rec.lemmas, rec.pos, sense_rank_of(rec.synset_id), gloss_text(rec)});
  }
  std::vector<Edge> edges;
  for (const auto& rec : records) {
    const auto src = node_of.find(rec.synset_id);
    if (src == node_of.end()) continue;
    for (const auto& tok : rec.tokens) {
      if (!tok.target) continue;
      if (!record_index.contains(*tok.target)) {
        ++result.unresolved_skipped;
        continue;
      }
      const auto dst = node_of.find(*tok.target);
      if (dst == node_of.end()) {
        ++result.filtered_skipped;
        continue;
      }
      edges.push_back({src->second, dst->second});
    }
  }
  result.build = build_graph(std::move(nodes), std::move(edges));
  return result;
}

/// Word-level graph: one node per case-folded first lemma, defined by that
/// word's lowest-ranked sense. Tagged tokens link to the target's word;
/// untagged tokens link to a word node with the same folded surface.
inline LinkResult reduce_first_sense(const std::vector<GlossRecord>& records,
                                     std::optional<PartOfSpeech> pos_filter = std::nullopt) {
  LinkResult result;
  std::unordered_map<std::string, std::size_t> record_index;
  for (std::size_t i = 0; i < records.size(); ++i) record_index.emplace(records[i].synset_id, i);

  // word -> index of its defining record
  std::map<std::string, std::size_t> definer;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (pos_filter && rec.pos != *pos_filter) continue;
    const std::string word = fold_case(rec.lemmas.front());
    const auto [it, inserted] = definer.emplace(word, i);
    if (!inserted && sense_rank_of(rec.synset_id) < sense_rank_of(records[it->second].synset_id)) it->second = i;
  }
  std::vector<SenseNode> nodes;
  std::unordered_map<std::string, NodeId> node_of;
  for (const auto& [word, idx] : definer) {
    node_of.emplace(word, static_cast<NodeId>(nodes.size()));
    const auto& rec = records[idx];
    nodes.push_back({word, {word}, rec.pos, 1, gloss_text(rec)});
  }
  std::vector<Edge> edges;
  for (const auto& [word, idx] : definer) {
    const NodeId src = node_of.at(word);
    for (const auto& tok : records[idx].tokens) {
      std::string target_word;
      if (tok.target) {
        const auto rec = record_index.find(*tok.target);
        if (rec == record_index.end()) {
          ++result.unresolved_skipped;
          continue;
        }
        target_word = fold_case(records[rec->second].lemmas.front());
      } else {
        target_word = fold_case(tok.surface);
      }
      const auto dst = node_of.find(target_word);
      if (dst == node_of.end()) {
        if (tok.target) ++result.filtered_skipped;
        continue;
      }
      edges.push_back({src, dst->second});
    }
  }
  result.build = build_graph(std::move(nodes), std::move(edges));
  return result;
}

// ---------------------------------------------------------------------------
// Word lists

struct WordList {
  std::string name;
  std::set<std::string> words;
};

inline WordList parse_word_list_stream(std::istream& in, std::string name) {
  WordList list{std::move(name), {}};
  std::string line;
  while (std::getline(in, line)) {
    if (detail::skippable(line)) continue;
    list.words.insert(fold_case(detail::trim(line)));
  }
  if (list.words.empty()) throw IngestError("word list '" + list.name + "' is empty");
  return list;
}

inline WordList parse_word_list(const std::string& path, std::string name) {
  auto in = detail::open_input(path);
  return parse_word_list_stream(in, std::move(name));
}

// ---------------------------------------------------------------------------
// Etymology dates

enum DateFlag : std::uint8_t {
  proper_noun = 1u << 0,
  compound = 1u << 1,
  polysemous = 1u << 2,
};

/// Year assigned to every Old English ("OE") origin.
inline constexpr int old_english_year = 1150;
inline constexpr int earliest_year = 600;

struct DateRecord {
  std::string word;
  int year = 0;
  std::uint8_t flags = 0;
  friend bool operator==(const DateRecord&, const DateRecord&) = default;
};

inline int current_year() {
  const std::chrono::year_month_day today{
      std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
  return static_cast<int>(today.year());
}

inline std::vector<DateRecord> parse_dates_stream(std::istream& in, const std::string& source = "<dates>") {
  std::vector<DateRecord> dates;
  std::unordered_map<std::string, std::size_t> seen;
  const int latest = current_year();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skippable(line)) continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3)
      detail::fail_at(source, line_no, "expected 2 or 3 tab-separated fields");
    DateRecord rec;
    rec.word = fold_case(detail::trim(fields[0]));
    if (rec.word.empty()) detail::fail_at(source, line_no, "empty word");
    const auto year = detail::trim(fields[1]);
    if (year == "OE") {
      rec.year = old_english_year;
    } else {
      if (year.empty() || !std::all_of(year.begin(), year.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
          year.size() > 6)
        detail::fail_at(source, line_no, "year must be an integer or OE, got '" + std::string(year) + "'");
      rec.year = std::stoi(std::string(year));
      if (rec.year < earliest_year || rec.year > latest)
        detail::fail_at(source, line_no, "year " + std::to_string(rec.year) + " outside [" +
                                             std::to_string(earliest_year) + ", " + std::to_string(latest) + "]");
    }
    if (fields.size() == 3) {
      for (auto flag : detail::split(detail::trim(fields[2]), ',')) {
        flag = detail::trim(flag);
        if (flag == "proper_noun") rec.flags |= proper_noun;
        else if (flag == "compound") rec.flags |= compound;
        else if (flag == "polysemous") rec.flags |= polysemous;
        else if (!flag.empty()) detail::fail_at(source, line_no, "unknown flag '" + std::string(flag) + "'");
      }
    }
    if (!seen.emplace(rec.word, line_no).second)
      detail::fail_at(source, line_no, "duplicate word '" + rec.word + "'");
    dates.push_back(std::move(rec));
  }
  return dates;
}

inline std::vector<DateRecord> parse_dates(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_dates_stream(in, path);
}

// ---------------------------------------------------------------------------
// Edge list + JSON-lines node metadata (also the pipeline's graph artifact)

inline void write_nodes_jsonl(std::ostream& out, const DictGraph& g) {
  for (const auto& node : g.nodes()) {
    nlohmann::ordered_json j;
    j["id"] = node.key;
    j["lemmas"] = node.lemmas;
    j["pos"] = pos_tag(node.pos);
    j["sense_rank"] = node.sense_rank;
    j["gloss"] = node.gloss;
    out << j.dump() << '\n';
  }
}

inline void write_edge_list(std::ostream& out, const DictGraph& g) {
  for (const Edge& e : g.edges()) out << g.node(e.src).key << '\t' << g.node(e.dst).key << '\n';
}

inline BuildResult parse_edge_list_streams(std::istream& nodes_in, std::istream& edges_in,
                                           const std::string& nodes_source = "<nodes>",
                                           const std::string& edges_source = "<edges>") {
  std::vector<SenseNode> nodes;
  std::unordered_map<std::string, NodeId> node_of;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(nodes_in, line)) {
    ++line_no;
    if (detail::skippable(line)) continue;
    SenseNode node;
    try {
      const auto j = nlohmann::json::parse(line);
      node.key = j.at("id").get<std::string>();
      if (j.contains("lemmas")) node.lemmas = j.at("lemmas").get<std::vector<std::string>>();
      if (j.contains("pos")) node.pos = parse_pos_tag(j.at("pos").get<std::string>());
      node.sense_rank = j.value("sense_rank", sense_rank_of(node.key));
      node.gloss = j.value("gloss", std::string{});
    } catch (const nlohmann::json::exception& e) {
      detail::fail_at(nodes_source, line_no, e.what());
    }
    if (node.lemmas.empty()) node.lemmas = {node.key};
    if (node.sense_rank < 1) detail::fail_at(nodes_source, line_no, "sense_rank must be >= 1");
    if (!node_of.emplace(node.key, static_cast<NodeId>(nodes.size())).second)
      detail::fail_at(nodes_source, line_no, "duplicate node id '" + node.key + "'");
    nodes.push_back(std::move(node));
  }
  std::vector<Edge> edges;
  line_no = 0;
  while (std::getline(edges_in, line)) {
    ++line_no;
    if (detail::skippable(line)) continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 2) detail::fail_at(edges_source, line_no, "expected src_id TAB dst_id");
    const auto src = node_of.find(std::string(detail::trim(fields[0])));
    const auto dst = node_of.find(std::string(detail::trim(fields[1])));
    if (src == node_of.end() || dst == node_of.end())
      detail::fail_at(edges_source, line_no, "edge refers to an unknown node id");
    edges.push_back({src->second, dst->second});
  }
  return build_graph(std::move(nodes), std::move(edges));
}

inline BuildResult parse_edge_list(const std::string& nodes_path, const std::string& edges_path) {
  auto nodes_in = detail::open_input(nodes_path);
  auto edges_in = detail::open_input(edges_path);
  return parse_edge_list_streams(nodes_in, edges_in, nodes_path, edges_path);
}

}  // namespace dictloops
