#pragma once

// Statistic-based log parsers behind one interface. Both consume message
// content (masked or not) and produce a template per line; lines sharing a
// template string form one group.
//
// Only Drain and LFA are provided. Other members of the family behave in
// ways worth knowing before adding them behind this interface: IPLoM treats
// symbols such as '=' as delimiters and drops them from its templates, and
// LogCluster assumes rare templates are noise, so neither recovers
// templates exactly even from perfectly masked input.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logprep/catalog.hpp"
#include "logprep/corpus.hpp"
#include "logprep/csv.hpp"
#include "logprep/error.hpp"
#include "logprep/masker.hpp"

namespace logprep {

struct LogLine {
  LineId line_id = 0;
  std::string content;
};

// Splits on runs of whitespace; punctuation stays attached to its token.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

inline std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

enum class ParserKind { drain, lfa };

inline std::string_view to_string(ParserKind k) { return k == ParserKind::drain ? "drain" : "lfa"; }

inline ParserKind parser_kind_from_string(std::string_view s) {
  if (s == "drain") return ParserKind::drain;
  if (s == "lfa") return ParserKind::lfa;
  throw ConfigError("unknown parser '" + std::string(s) + "' (expected drain or lfa)");
}

struct ParserConfig {
  ParserKind kind = ParserKind::drain;
  unsigned drain_depth = 4;
  double drain_similarity_threshold = 0.4;
  unsigned drain_max_children = 100;

  void validate() const {
    if (drain_depth < 3) throw ConfigError("drain depth must be at least 3");
    if (!(drain_similarity_threshold > 0.0 && drain_similarity_threshold <= 1.0))
      throw ConfigError("drain similarity threshold must lie in (0, 1]");
    if (drain_max_children < 1) throw ConfigError("drain max children must be at least 1");
  }
};

struct ParseOutcome {
  std::map<LineId, std::string> per_line_template;
  std::map<std::string, std::vector<LineId>> groups;  // line ids ascending
  std::optional<RuleCatalog> effective_catalog;

  static ParseOutcome from_assignments(std::span<const std::pair<LineId, std::string>> assignments) {
    ParseOutcome out;
    for (const auto& [id, tmpl] : assignments) {
      if (!out.per_line_template.emplace(id, tmpl).second)
        throw InputMismatchError("line id " + std::to_string(id) + " assigned twice");
      out.groups[tmpl].push_back(id);
    }
    for (auto& [t, ids] : out.groups) std::sort(ids.begin(), ids.end());
    return out;
  }
};

// ---------------------------------------------------------------------------
// Drain: fixed-depth parse tree. Depth counts the root, the token-count
// layer and the leaf layer, so depth 4 routes on one leading token. Messages
// are routed by token count, then by their leading tokens (tokens containing
// digits route through a wildcard child), and finally matched against the
// clusters stored at the leaf by positional token similarity.

class DrainParser {
 public:
  explicit DrainParser(const ParserConfig& config = {})
      : token_levels_(config.drain_depth >= 3 ? config.drain_depth - 3 : 0),
        threshold_(config.drain_similarity_threshold),
        max_children_(config.drain_max_children) {
    config.validate();
  }

  // Returns the id of the cluster the message joined.
  std::size_t add(LineId id, std::vector<std::string> tokens) {
    auto& length_node = roots_[tokens.size()];
    const Node* leaf = search(length_node, tokens);
    std::optional<std::size_t> best;
    if (leaf) best = fast_match(leaf->clusters, tokens);

    if (!best) {
      clusters_.push_back({std::move(tokens), {id}});
      const std::size_t cid = clusters_.size() - 1;
      insert(length_node, cid);
      return cid;
    }
    auto& cluster = clusters_[*best];
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (cluster.tokens[i] != tokens[i]) cluster.tokens[i] = std::string(kPlaceholder);
    cluster.line_ids.push_back(id);
    return *best;
  }

  ParseOutcome outcome() const {
    std::vector<std::pair<LineId, std::string>> assignments;
    for (const auto& c : clusters_) {
      const std::string tmpl = join_tokens(c.tokens);
      for (LineId id : c.line_ids) assignments.emplace_back(id, tmpl);
    }
    return ParseOutcome::from_assignments(assignments);
  }

  std::size_t cluster_count() const { return clusters_.size(); }

 private:
  struct Cluster {
    std::vector<std::string> tokens;
    std::vector<LineId> line_ids;
  };
  struct Node {
    std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
    std::vector<std::size_t> clusters;
  };

  static bool has_digit(std::string_view token) {
    return std::any_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  }

  // Number of leading tokens used for routing a message of `length` tokens.
  std::size_t route_length(std::size_t length) const { return std::min(token_levels_, length); }

  const Node* search(const Node& length_node, const std::vector<std::string>& tokens) const {
    const Node* node = &length_node;
    for (std::size_t i = 0; i < route_length(tokens.size()); ++i) {
      if (auto it = node->children.find(tokens[i]); it != node->children.end()) {
        node = it->second.get();
      } else if (auto wild = node->children.find(kPlaceholder); wild != node->children.end()) {
        node = wild->second.get();
      } else {
        return nullptr;
      }
    }
    return node;
  }

  void insert(Node& length_node, std::size_t cid) {
    const auto& tokens = clusters_[cid].tokens;
    Node* node = &length_node;
    for (std::size_t i = 0; i < route_length(tokens.size()); ++i) {
      const std::string& token = tokens[i];
      auto& kids = node->children;
      if (auto it = kids.find(token); it != kids.end()) {
        node = it->second.get();
        continue;
      }
      const bool has_wild = kids.contains(kPlaceholder);
      std::string key;
      if (has_digit(token)) {
        key = kPlaceholder;
      } else if (has_wild) {
        key = kids.size() < max_children_ ? token : std::string(kPlaceholder);
      } else if (kids.size() + 1 < max_children_) {
        key = token;
      } else {
        key = kPlaceholder;  // the last free slot becomes the wildcard child
      }
      auto& child = kids[key];
      if (!child) child = std::make_unique<Node>();
      node = child.get();
    }
    node->clusters.push_back(cid);
  }

  // Similarity counts positions where a concrete template token equals the
  // message token; ties prefer the template with more wildcards.
  std::optional<std::size_t> fast_match(const std::vector<std::size_t>& candidates,
                                        const std::vector<std::string>& tokens) const {
    std::optional<std::size_t> best;
    double best_sim = -1.0;
    long best_params = -1;
    for (std::size_t cid : candidates) {
      const auto& tmpl = clusters_[cid].tokens;
      std::size_t same = 0;
      long params = 0;
      for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == kPlaceholder) {
          ++params;
        } else if (tmpl[i] == tokens[i]) {
          ++same;
        }
      }
      const double sim = tokens.empty() ? 1.0 : static_cast<double>(same) / static_cast<double>(tokens.size());
      if (sim > best_sim || (sim == best_sim && params > best_params)) {
        best_sim = sim;
        best_params = params;
        best = cid;
      }
    }
    if (best && best_sim >= threshold_) return best;
    return std::nullopt;
  }

  std::size_t token_levels_;
  double threshold_;
  std::size_t max_children_;
  std::map<std::size_t, Node> roots_;
  std::vector<Cluster> clusters_;
};

// ---------------------------------------------------------------------------
// LFA: frequency-based abstraction. Messages are bucketed by token count and
// each (position, token) pair is counted inside its bucket. Within a message
// the distinct counts are sorted and split at the largest gap; tokens at or
// below the gap become wildcards. Equal gaps resolve to the highest one, i.e.
// toward more wildcards. A message whose tokens all share one count is kept
// verbatim.

class LfaParser {
 public:
  ParseOutcome parse(std::span<const LogLine> lines) const {
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(lines.size());
    std::map<std::size_t, std::map<std::pair<std::size_t, std::string>, std::size_t>> counts;
    for (const auto& line : lines) {
      tokenized.push_back(tokenize(line.content));
      auto& bucket = counts[tokenized.back().size()];
      for (std::size_t pos = 0; pos < tokenized.back().size(); ++pos) ++bucket[{pos, tokenized.back()[pos]}];
    }

    std::vector<std::pair<LineId, std::string>> assignments;
    assignments.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto tokens = tokenized[i];
      const auto& bucket = counts[tokens.size()];
      std::vector<std::size_t> freq(tokens.size());
      std::vector<std::size_t> distinct;
      for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
        freq[pos] = bucket.at({pos, tokens[pos]});
        if (tokens[pos] != kPlaceholder) distinct.push_back(freq[pos]);
      }
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

      if (distinct.size() > 1) {
        std::size_t split = 0;
        std::size_t widest = 0;
        for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
          const std::size_t gap = distinct[k + 1] - distinct[k];
          if (gap >= widest) {
            widest = gap;
            split = distinct[k];
          }
        }
        for (std::size_t pos = 0; pos < tokens.size(); ++pos)
          if (freq[pos] <= split) tokens[pos] = kPlaceholder;
      }
      assignments.emplace_back(lines[i].line_id, join_tokens(tokens));
    }
    return ParseOutcome::from_assignments(assignments);
  }
};

// ---------------------------------------------------------------------------

inline ParseOutcome parse(std::span<const LogLine> lines, const ParserConfig& config = {}) {
  config.validate();
  if (config.kind == ParserKind::lfa) return LfaParser{}.parse(lines);
  DrainParser drain(config);
  for (const auto& line : lines) drain.add(line.line_id, tokenize(line.content));
  return drain.outcome();
}

struct PreprocessOptions {
  std::size_t applicability_prefix = 2000;
  bool applicability_filter = true;
};

// Estimates rule applicability on the leading lines, masks every line with
// the surviving rules, then parses. The catalog actually used is recorded in
// the outcome.
inline ParseOutcome parse_with_preprocessing(std::span<const LogRecord> records, const RuleCatalog& catalog,
                                             const ParserConfig& config = {}, const PreprocessOptions& opts = {}) {
  std::vector<std::string> contents;
  contents.reserve(records.size());
  for (const auto& r : records) contents.push_back(r.content);

  RuleCatalog effective = catalog;
  if (opts.applicability_filter) effective = estimate_applicability(contents, catalog, opts.applicability_prefix).catalog;

  std::vector<LogLine> lines;
  lines.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) lines.push_back({records[i].line_id, apply_masks(contents[i], effective)});

  ParseOutcome out = parse(lines, config);
  out.effective_catalog = std::move(effective);
  return out;
}

// ---------------------------------------------------------------------------
// Export in the Loghub "structured" convention.

inline void write_structured_csv(std::ostream& out, const ParseOutcome& outcome) {
  csv::write_row(out, {"line_id", "template"});
  for (const auto& [id, tmpl] : outcome.per_line_template) csv::write_row(out, {std::to_string(id), tmpl});
}

inline void write_templates_csv(std::ostream& out, const ParseOutcome& outcome) {
  csv::write_row(out, {"template", "count"});
  for (const auto& [tmpl, ids] : outcome.groups) csv::write_row(out, {tmpl, std::to_string(ids.size())});
}

inline ParseOutcome outcome_from_structured_csv(const csv::Table& table) {
  const auto id_col = table.column("line_id");
  const auto tmpl_col = table.column("template");
  if (!id_col) throw SchemaError("missing required column 'line_id'");
  if (!tmpl_col) throw SchemaError("missing required column 'template'");
  std::vector<std::pair<LineId, std::string>> assignments;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    assignments.emplace_back(parse_line_id(table.rows[r][*id_col], r + 1), table.rows[r][*tmpl_col]);
  return ParseOutcome::from_assignments(assignments);
}

}  // namespace logprep
