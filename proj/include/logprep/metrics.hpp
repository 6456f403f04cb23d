#pragma once

// Grouping and template accuracy of a parse against ground truth, with
// frequency and complexity breakdowns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "logprep/corpus.hpp"
#include "logprep/csv.hpp"
#include "logprep/error.hpp"
#include "logprep/parsers.hpp"

namespace logprep {

// Collapses whitespace runs to a single space and trims both ends.
inline std::string normalize_template(std::string_view t) {
  std::string out;
  out.reserve(t.size());
  bool pending_space = false;
  for (char c : t) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// Harmonic mean; 0 when both inputs are 0.
inline double f1(double precision, double recall) {
  return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

struct Accuracy {
  double value = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

namespace detail {

// (predicted template, truth template) per message, in ascending line id order.
struct Alignment {
  std::vector<LineId> ids;
  std::vector<const std::string*> pred;
  std::vector<const std::string*> truth;
};

inline Alignment align(const ParseOutcome& pred, std::span<const GroundTruthEntry> truth) {
  Alignment a;
  std::map<LineId, const std::string*> truth_by_id;
  for (const auto& e : truth) {
    if (!truth_by_id.emplace(e.line_id, &e.template_text).second)
      throw InputMismatchError("ground truth lists line id " + std::to_string(e.line_id) + " twice");
  }
  if (truth_by_id.size() != pred.per_line_template.size())
    throw InputMismatchError("prediction covers " + std::to_string(pred.per_line_template.size()) +
                             " lines but ground truth has " + std::to_string(truth_by_id.size()));
  for (const auto& [id, tmpl] : pred.per_line_template) {
    const auto it = truth_by_id.find(id);
    if (it == truth_by_id.end())
      throw InputMismatchError("line id " + std::to_string(id) + " is missing from the ground truth");
    a.ids.push_back(id);
    a.pred.push_back(&tmpl);
    a.truth.push_back(it->second);
  }
  return a;
}

// Per predicted group: whether its member set equals one truth group's set,
// and which truth template that is.
struct GroupCheck {
  std::size_t size = 0;
  bool exact = false;
  const std::string* truth_template = nullptr;
};

struct GroupStats {
  std::map<std::string_view, GroupCheck> predicted;
  std::map<std::string_view, std::size_t> truth_sizes;
};

inline GroupStats group_stats(const Alignment& a) {
  GroupStats s;
  std::map<std::string_view, std::set<std::string_view>> truth_of_group;
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    ++s.truth_sizes[*a.truth[i]];
    auto& g = s.predicted[*a.pred[i]];
    ++g.size;
    g.truth_template = a.truth[i];
    truth_of_group[*a.pred[i]].insert(*a.truth[i]);
  }
  for (auto& [key, g] : s.predicted) {
    const auto& truths = truth_of_group[key];
    g.exact = truths.size() == 1 && s.truth_sizes[*truths.begin()] == g.size;
  }
  return s;
}

inline double ga(const Alignment& a, const GroupStats& s) {
  std::size_t correct = 0;
  for (const auto& [key, g] : s.predicted)
    if (g.exact) correct += g.size;
  return safe_ratio(correct, a.ids.size());
}

inline double pa(const Alignment& a) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < a.ids.size(); ++i)
    if (normalize_template(*a.pred[i]) == normalize_template(*a.truth[i])) ++correct;
  return safe_ratio(correct, a.ids.size());
}

inline Accuracy fga(const GroupStats& s) {
  std::size_t correct = 0;
  for (const auto& [key, g] : s.predicted) correct += g.exact ? 1 : 0;
  const double p = safe_ratio(correct, s.predicted.size());
  const double r = safe_ratio(correct, s.truth_sizes.size());
  return {f1(p, r), p, r};
}

inline Accuracy fta(const GroupStats& s) {
  std::size_t correct = 0;
  for (const auto& [key, g] : s.predicted)
    if (g.exact && normalize_template(key) == normalize_template(*g.truth_template)) ++correct;
  const double p = safe_ratio(correct, s.predicted.size());
  const double r = safe_ratio(correct, s.truth_sizes.size());
  return {f1(p, r), p, r};
}

}  // namespace detail

// Fraction of messages whose predicted group has exactly the members of
// their ground-truth template.
inline double grouping_accuracy(const ParseOutcome& pred, std::span<const GroundTruthEntry> truth) {
  const auto a = detail::align(pred, truth);
  return detail::ga(a, detail::group_stats(a));
}

// Fraction of messages whose predicted template string equals the truth
// template after whitespace normalisation.
inline double parsing_accuracy(const ParseOutcome& pred, std::span<const GroundTruthEntry> truth) {
  return detail::pa(detail::align(pred, truth));
}

inline Accuracy f1_group_accuracy(const ParseOutcome& pred, std::span<const GroundTruthEntry> truth) {
  return detail::fga(detail::group_stats(detail::align(pred, truth)));
}

// A predicted template is correct when its members equal a truth template's
// members and its string equals that template.
inline Accuracy f1_template_accuracy(const ParseOutcome& pred, std::span<const GroundTruthEntry> truth) {
  return detail::fta(detail::group_stats(detail::align(pred, truth)));
}

// ---------------------------------------------------------------------------
// Subgroups

enum class SubgroupKind { frequency, complexity };

inline std::string_view to_string(SubgroupKind k) { return k == SubgroupKind::frequency ? "frequency" : "complexity"; }

inline SubgroupKind subgroup_kind_from_string(std::string_view s) {
  if (s == "frequency") return SubgroupKind::frequency;
  if (s == "complexity") return SubgroupKind::complexity;
  throw ConfigError("unknown subgroup kind '" + std::string(s) + "' (expected frequency or complexity)");
}

struct SubgroupSpec {
  SubgroupKind kind = SubgroupKind::frequency;
  double frequency_fraction = 0.10;
  // Complexity bands: p == 0, 1 <= p <= few_max, p > few_max.
  std::size_t few_max = 4;

  void validate() const {
    if (!(frequency_fraction > 0.0 && frequency_fraction <= 0.5))
      throw ConfigError("frequency fraction must lie in (0, 0.5]");
    if (few_max < 1) throw ConfigError("complexity bands need few_max >= 1");
  }
};

struct TemplateBand {
  std::string label;
  std::vector<std::string> templates;
};

inline constexpr std::string_view kMostFrequent = "most_frequent";
inline constexpr std::string_view kLeastFrequent = "least_frequent";

// Top and bottom ceil(fraction * T) templates by occurrence count. Ties order
// lexicographically. When the two bands would overlap, the least-frequent
// band gets only the templates not already in the top band.
inline std::vector<TemplateBand> frequency_subgroups(std::span<const GroundTruthEntry> truth, double fraction) {
  SubgroupSpec{SubgroupKind::frequency, fraction}.validate();
  std::map<std::string, std::size_t> counts;
  for (const auto& e : truth) ++counts[e.template_text];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  const std::size_t total = ranked.size();
  const auto band = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
  const std::size_t top = std::min(band, total);
  const std::size_t bottom = std::min(band, total - top);

  TemplateBand most{std::string(kMostFrequent), {}};
  TemplateBand least{std::string(kLeastFrequent), {}};
  for (std::size_t i = 0; i < top; ++i) most.templates.push_back(ranked[i].first);
  for (std::size_t i = total - bottom; i < total; ++i) least.templates.push_back(ranked[i].first);
  return {std::move(most), std::move(least)};
}

inline std::string complexity_label(std::size_t params, std::size_t few_max = 4) {
  if (params == 0) return "params_0";
  if (params <= few_max) return "params_1_to_" + std::to_string(few_max);
  return "params_" + std::to_string(few_max + 1) + "_plus";
}

// Partition of the truth templates by placeholder count.
inline std::vector<TemplateBand> complexity_subgroups(std::span<const GroundTruthEntry> truth,
                                                      std::size_t few_max = 4) {
  std::vector<TemplateBand> bands{
      {complexity_label(0, few_max), {}}, {complexity_label(1, few_max), {}}, {complexity_label(few_max + 1, few_max), {}}};
  std::set<std::string> seen;
  for (const auto& e : truth) {
    if (!seen.insert(e.template_text).second) continue;
    const std::size_t p = count_placeholders(e.template_text);
    bands[p == 0 ? 0 : (p <= few_max ? 1 : 2)].templates.push_back(e.template_text);
  }
  for (auto& b : bands) std::sort(b.templates.begin(), b.templates.end());
  return bands;
}

inline std::vector<TemplateBand> subgroups(std::span<const GroundTruthEntry> truth, const SubgroupSpec& spec) {
  spec.validate();
  return spec.kind == SubgroupKind::frequency ? frequency_subgroups(truth, spec.frequency_fraction)
                                              : complexity_subgroups(truth, spec.few_max);
}

// ---------------------------------------------------------------------------
// Reports

struct BandMetrics {
  double ga = 0.0;
  double pa = 0.0;
  double fga = 0.0;
  double fta = 0.0;
  std::size_t messages = 0;
  std::size_t templates = 0;
};

struct EvaluationReport {
  double ga = 0.0;
  double pa = 0.0;
  double fga = 0.0;
  double fga_precision = 0.0;
  double fga_recall = 0.0;
  double fta = 0.0;
  double fta_precision = 0.0;
  double fta_recall = 0.0;
  std::map<std::string, BandMetrics> subgroup_breakdowns;
  std::size_t messages = 0;
  std::size_t truth_templates = 0;
  std::size_t predicted_templates = 0;
};

// Metrics over the messages whose truth template lies in `band`, against the
// prediction restricted to those same messages.
inline BandMetrics band_metrics(const ParseOutcome& pred, std::span<const GroundTruthEntry> truth,
                                const TemplateBand& band) {
  const std::set<std::string_view> members(band.templates.begin(), band.templates.end());
  std::vector<GroundTruthEntry> sub_truth;
  std::vector<std::pair<LineId, std::string>> sub_pred;
  for (const auto& e : truth) {
    if (!members.contains(e.template_text)) continue;
    const auto it = pred.per_line_template.find(e.line_id);
    if (it == pred.per_line_template.end())
      throw InputMismatchError("line id " + std::to_string(e.line_id) + " is missing from the prediction");
    sub_truth.push_back({e.line_id, {}, e.template_text, {}, false});
    sub_pred.emplace_back(e.line_id, it->second);
  }
  BandMetrics m;
  m.messages = sub_truth.size();
  m.templates = band.templates.size();
  if (sub_truth.empty()) return m;
  const auto outcome = ParseOutcome::from_assignments(sub_pred);
  const auto a = detail::align(outcome, sub_truth);
  const auto s = detail::group_stats(a);
  m.ga = detail::ga(a, s);
  m.pa = detail::pa(a);
  m.fga = detail::fga(s).value;
  m.fta = detail::fta(s).value;
  return m;
}

inline EvaluationReport evaluate(const ParseOutcome& pred, std::span<const GroundTruthEntry> truth,
                                 std::span<const SubgroupSpec> specs = {}) {
  const auto a = detail::align(pred, truth);
  const auto s = detail::group_stats(a);
  EvaluationReport r;
  r.ga = detail::ga(a, s);
  r.pa = detail::pa(a);
  const auto g = detail::fga(s);
  const auto t = detail::fta(s);
  r.fga = g.value;
  r.fga_precision = g.precision;
  r.fga_recall = g.recall;
  r.fta = t.value;
  r.fta_precision = t.precision;
  r.fta_recall = t.recall;
  r.messages = a.ids.size();
  r.truth_templates = s.truth_sizes.size();
  r.predicted_templates = s.predicted.size();
  for (const auto& spec : specs)
    for (const auto& band : subgroups(truth, spec)) r.subgroup_breakdowns[band.label] = band_metrics(pred, truth, band);
  return r;
}

inline nlohmann::json report_to_json(const EvaluationReport& r) {
  nlohmann::json bands = nlohmann::json::object();
  for (const auto& [label, b] : r.subgroup_breakdowns)
    bands[label] = {{"ga", b.ga}, {"pa", b.pa}, {"fga", b.fga}, {"fta", b.fta}, {"messages", b.messages},
                    {"templates", b.templates}};
  return {{"ga", r.ga},
          {"pa", r.pa},
          {"fga", r.fga},
          {"fga_precision", r.fga_precision},
          {"fga_recall", r.fga_recall},
          {"fta", r.fta},
          {"fta_precision", r.fta_precision},
          {"fta_recall", r.fta_recall},
          {"subgroup_breakdowns", bands},
          {"counts",
           {{"messages", r.messages}, {"truth_templates", r.truth_templates}, {"predicted_templates", r.predicted_templates}}}};
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
  EvaluationReport r;
  try {
    r.ga = j.at("ga").get<double>();
    r.pa = j.at("pa").get<double>();
    r.fga = j.at("fga").get<double>();
    r.fga_precision = j.at("fga_precision").get<double>();
    r.fga_recall = j.at("fga_recall").get<double>();
    r.fta = j.at("fta").get<double>();
    r.fta_precision = j.at("fta_precision").get<double>();
    r.fta_recall = j.at("fta_recall").get<double>();
    for (const auto& [label, b] : j.at("subgroup_breakdowns").items()) {
      r.subgroup_breakdowns[label] = {b.at("ga").get<double>(),        b.at("pa").get<double>(),
                                      b.at("fga").get<double>(),       b.at("fta").get<double>(),
                                      b.at("messages").get<std::size_t>(), b.at("templates").get<std::size_t>()};
    }
    const auto& c = j.at("counts");
    r.messages = c.at("messages").get<std::size_t>();
    r.truth_templates = c.at("truth_templates").get<std::size_t>();
    r.predicted_templates = c.at("predicted_templates").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

inline std::string format_ratio(double v) {
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << v;
  return s.str();
}

// Flat layout: dataset, configuration, GA, FGA, PA, FTA.
inline void write_report_csv_header(std::ostream& out) {
  csv::write_row(out, {"dataset", "configuration", "GA", "FGA", "PA", "FTA"});
}

inline void write_report_csv_row(std::ostream& out, std::string_view dataset, std::string_view configuration,
                                 const EvaluationReport& r) {
  csv::write_row(out, {std::string(dataset), std::string(configuration), format_ratio(r.ga), format_ratio(r.fga),
                       format_ratio(r.pa), format_ratio(r.fta)});
}

// band, messages, templates, GA, FGA, PA, FTA
inline void write_bands_csv(std::ostream& out, const EvaluationReport& r) {
  csv::write_row(out, {"band", "messages", "templates", "GA", "FGA", "PA", "FTA"});
  for (const auto& [label, b] : r.subgroup_breakdowns)
    csv::write_row(out, {label, std::to_string(b.messages), std::to_string(b.templates), format_ratio(b.ga),
                         format_ratio(b.fga), format_ratio(b.pa), format_ratio(b.fta)});
}

}  // namespace logprep
