#pragma once

// Ordered variable masking, applicability estimation and the variable
// match-statistics harness.

#include <algorithm>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/regex.hpp>
#include <json.hpp>

#include "logprep/catalog.hpp"
#include "logprep/corpus.hpp"
#include "logprep/csv.hpp"

namespace logprep {

// One masked region, in offsets of the original (unmasked) content.
struct MaskSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t rule_index = 0;  // position in RuleCatalog::rules()

  friend bool operator==(const MaskSpan&, const MaskSpan&) = default;
};

struct MaskResult {
  std::string text;
  std::vector<MaskSpan> spans;  // sorted by start
};

namespace detail {

struct Piece {
  std::size_t orig_start;
  std::size_t orig_end;
  std::string text;  // original text for literal pieces, the mask otherwise
  bool shielded;
  std::size_t rule;  // npos for placeholders already present in the input
};

inline constexpr std::size_t kInputPlaceholder = static_cast<std::size_t>(-1);

inline std::vector<Piece> initial_pieces(std::string_view content) {
  std::vector<Piece> pieces;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const auto hit = content.find(kPlaceholder, pos);
    const auto stop = hit == std::string_view::npos ? content.size() : hit;
    if (stop > pos) pieces.push_back({pos, stop, std::string(content.substr(pos, stop - pos)), false, 0});
    if (hit == std::string_view::npos) break;
    pieces.push_back({hit, hit + kPlaceholder.size(), std::string(kPlaceholder), true, kInputPlaceholder});
    pos = hit + kPlaceholder.size();
  }
  return pieces;
}

}  // namespace detail

namespace detail {

// One ordered pass of every enabled rule over the literal pieces. Returns
// whether any rule matched.
inline bool sweep(std::vector<Piece>& pieces, const RuleCatalog& catalog) {
  bool changed = false;
  std::string current;
  std::vector<std::size_t> offsets;
  for (std::size_t ri = 0; ri < catalog.size(); ++ri) {
    const MaskRule& rule = catalog.rules()[ri];
    if (!rule.enabled) continue;
    const boost::regex& re = catalog.regex(ri);

    current.clear();
    offsets.clear();
    for (const auto& p : pieces) {
      offsets.push_back(current.size());
      current += p.text;
    }

    std::vector<Piece> next;
    next.reserve(pieces.size());
    for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
      const auto& p = pieces[pi];
      if (p.shielded) {
        next.push_back(p);
        continue;
      }
      const auto seg_begin = current.cbegin() + static_cast<std::ptrdiff_t>(offsets[pi]);
      const auto seg_end = seg_begin + static_cast<std::ptrdiff_t>(p.text.size());
      auto flags = boost::match_default | boost::match_not_null;
      if (seg_end != current.cend()) flags |= boost::match_not_eol;

      std::size_t consumed = 0;  // offset within p.text
      auto it = seg_begin;
      boost::smatch m;
      while (it != seg_end) {
        auto f = flags;
        if (it != current.cbegin()) f |= boost::match_prev_avail;
        if (!boost::regex_search(it, seg_end, m, re, f)) break;
        const auto ms = static_cast<std::size_t>(m[0].first - seg_begin);
        const auto me = static_cast<std::size_t>(m[0].second - seg_begin);
        if (ms > consumed)
          next.push_back({p.orig_start + consumed, p.orig_start + ms, p.text.substr(consumed, ms - consumed), false, 0});
        next.push_back({p.orig_start + ms, p.orig_start + me, rule.mask, true, ri});
        changed = true;
        consumed = me;
        it = m[0].second;
      }
      if (consumed == 0) {
        next.push_back(p);
      } else if (consumed < p.text.size()) {
        next.push_back({p.orig_start + consumed, p.orig_end, p.text.substr(consumed), false, 0});
      }
    }
    pieces = std::move(next);
  }
  return changed;
}

}  // namespace detail

// Applies the enabled rules of `catalog` in order. Each rule replaces all of
// its non-overlapping leftmost matches. Text produced by a mask, and any
// `<*>` already present in the input, is opaque to every later rule: rules
// only search the literal stretches between masks, although lookarounds and
// word boundaries still see the neighbouring mask characters.
//
// Because of those lookarounds, a mask written by a late rule can enable a
// match for an earlier rule (a path glued to a host:port, say). The ordered
// sweep is therefore repeated until it changes nothing, which makes masking
// idempotent. Every match removes literal text, so this terminates.
inline MaskResult mask_with_spans(std::string_view content, const RuleCatalog& catalog) {
  std::vector<detail::Piece> pieces = detail::initial_pieces(content);
  while (detail::sweep(pieces, catalog)) {
  }

  MaskResult result;
  for (const auto& p : pieces) {
    result.text += p.text;
    if (p.shielded && p.rule != detail::kInputPlaceholder) result.spans.push_back({p.orig_start, p.orig_end, p.rule});
  }
  return result;
}

inline std::string apply_masks(std::string_view content, const RuleCatalog& catalog) {
  return mask_with_spans(content, catalog).text;
}

// ---------------------------------------------------------------------------
// Applicability estimation

struct ApplicabilityResult {
  RuleCatalog catalog;
  std::map<std::string, std::size_t> match_counts;  // enabled rules only
  std::size_t lines_scanned = 0;
  bool empty_input = false;  // warning: nothing to estimate from
};

// Disables every enabled rule that never fires while masking the first
// `prefix_size` lines. Firing is judged in pipeline order, so a rule whose
// candidates are always claimed by an earlier rule counts as inapplicable.
inline ApplicabilityResult estimate_applicability(std::span<const std::string> lines, const RuleCatalog& catalog,
                                                  std::size_t prefix_size = 2000) {
  if (prefix_size < 1) throw ConfigError("applicability prefix must be at least 1");
  ApplicabilityResult out{catalog, {}, 0, lines.empty()};
  if (lines.empty()) return out;

  std::vector<std::size_t> counts(catalog.size(), 0);
  const std::size_t n = std::min(prefix_size, lines.size());
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& span : mask_with_spans(lines[i], catalog).spans) ++counts[span.rule_index];
  out.lines_scanned = n;

  RuleCatalog filtered = catalog;
  for (std::size_t ri = 0; ri < catalog.size(); ++ri) {
    const auto& rule = catalog.rules()[ri];
    if (!rule.enabled) continue;
    out.match_counts[rule.name] = counts[ri];
    if (counts[ri] == 0) filtered = filtered.with_enabled(rule.name, false);
  }
  out.catalog = std::move(filtered);
  return out;
}

// ---------------------------------------------------------------------------
// Match statistics

struct RuleMatchCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
};

struct MatchReport {
  std::map<std::string, RuleMatchCounts> per_rule;  // every enabled rule
  double precision = 0.0;
  double recall = 0.0;
  std::size_t total_variables = 0;    // non-empty variables of aligned entries
  std::size_t matched_variables = 0;
  std::size_t empty_variables = 0;    // excluded from the totals
  std::size_t skipped_entries = 0;    // entries whose template did not align
};

inline double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// A mask span is a true positive iff it covers exactly one ground-truth
// variable span; a variable is matched iff some mask span equals it.
inline MatchReport match_statistics(std::span<const GroundTruthEntry> entries, const RuleCatalog& catalog) {
  MatchReport report;
  for (const auto& r : catalog.rules())
    if (r.enabled) report.per_rule[r.name];

  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const auto& e : entries) {
    if (e.extraction_failed) {
      ++report.skipped_entries;
      continue;
    }
    std::vector<std::pair<std::size_t, std::size_t>> vars;
    for (const auto& v : e.variables) {
      if (v.start == v.end) {
        ++report.empty_variables;
        continue;
      }
      vars.emplace_back(v.start, v.end);
    }
    std::sort(vars.begin(), vars.end());
    report.total_variables += vars.size();

    const auto spans = mask_with_spans(e.content, catalog).spans;
    for (const auto& s : spans) {
      auto& counts = report.per_rule[catalog.rules()[s.rule_index].name];
      if (std::binary_search(vars.begin(), vars.end(), std::make_pair(s.start, s.end))) {
        ++counts.true_positives;
        ++tp;
        ++report.matched_variables;  // spans never overlap, so each variable matches at most once
      } else {
        ++counts.false_positives;
        ++fp;
      }
    }
  }
  report.precision = safe_ratio(tp, tp + fp);
  report.recall = safe_ratio(report.matched_variables, report.total_variables);
  return report;
}

inline nlohmann::json match_report_to_json(const MatchReport& r) {
  nlohmann::json rules = nlohmann::json::object();
  for (const auto& [name, c] : r.per_rule)
    rules[name] = {{"true_positives", c.true_positives}, {"false_positives", c.false_positives}};
  return {{"per_rule", rules},
          {"dataset",
           {{"precision", r.precision},
            {"recall", r.recall},
            {"total_variables", r.total_variables},
            {"matched_variables", r.matched_variables},
            {"empty_variables", r.empty_variables},
            {"skipped_entries", r.skipped_entries}}}};
}

inline MatchReport match_report_from_json(const nlohmann::json& j) {
  MatchReport r;
  try {
    for (const auto& [name, c] : j.at("per_rule").items())
      r.per_rule[name] = {c.at("true_positives").get<std::size_t>(), c.at("false_positives").get<std::size_t>()};
    const auto& d = j.at("dataset");
    r.precision = d.at("precision").get<double>();
    r.recall = d.at("recall").get<double>();
    r.total_variables = d.at("total_variables").get<std::size_t>();
    r.matched_variables = d.at("matched_variables").get<std::size_t>();
    r.empty_variables = d.value("empty_variables", std::size_t{0});
    r.skipped_entries = d.value("skipped_entries", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed match report: ") + e.what());
  }
  return r;
}

// One row per rule plus a final "dataset" summary row.
inline void write_match_report_csv(std::ostream& out, const MatchReport& r) {
  csv::write_row(out, {"scope", "rule", "true_positives", "false_positives", "precision", "recall",
                       "total_variables", "matched_variables"});
  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << std::fixed << v;
    return s.str();
  };
  for (const auto& [name, c] : r.per_rule) {
    csv::write_row(out, {"rule", name, std::to_string(c.true_positives), std::to_string(c.false_positives),
                         fmt(safe_ratio(c.true_positives, c.true_positives + c.false_positives)), "", "", ""});
  }
  std::size_t tp = 0, fp = 0;
  for (const auto& [name, c] : r.per_rule) {
    tp += c.true_positives;
    fp += c.false_positives;
  }
  csv::write_row(out, {"dataset", "", std::to_string(tp), std::to_string(fp), fmt(r.precision), fmt(r.recall),
                       std::to_string(r.total_variables), std::to_string(r.matched_variables)});
}

}  // namespace logprep
