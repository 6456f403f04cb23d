#pragma once

// Command-line front end. `run` holds all of the logic so tests can drive
// it in-process; tools/main.cpp only forwards argv.
//
// Exit codes: 0 success, 1 I/O error, 2 configuration/validation/schema
// error (including bad flags), 3 prediction/ground-truth mismatch.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "logprep/catalog.hpp"
#include "logprep/corpus.hpp"
#include "logprep/csv.hpp"
#include "logprep/error.hpp"
#include "logprep/masker.hpp"
#include "logprep/metrics.hpp"
#include "logprep/parsers.hpp"

namespace logprep::cli {

struct RunConfig {
  std::string dataset_path;
  std::string ground_truth_path;
  std::string prediction_path;
  std::string log_format;
  std::string catalog_path = "default";
  ParserConfig parser;
  std::size_t applicability_prefix = 2000;
  bool applicability_filter = true;
  std::string output_dir = ".";
  std::optional<SubgroupSpec> subgroup;
  std::string format = "both";  // json, csv or both
  std::string dataset_name;
};

// Reads a RunConfig from JSON. Field names mirror the struct; the parser
// block uses {kind, drain_depth, drain_similarity_threshold,
// drain_max_children} and the subgroup block {kind, frequency_fraction}.
inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  try {
    c.dataset_path = j.value("dataset_path", c.dataset_path);
    c.ground_truth_path = j.value("ground_truth_path", c.ground_truth_path);
    c.prediction_path = j.value("prediction_path", c.prediction_path);
    c.log_format = j.value("log_format", c.log_format);
    c.catalog_path = j.value("catalog_path", c.catalog_path);
    c.applicability_prefix = j.value("applicability_prefix", c.applicability_prefix);
    c.applicability_filter = j.value("applicability_filter", c.applicability_filter);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.format = j.value("format", c.format);
    c.dataset_name = j.value("dataset_name", c.dataset_name);
    if (j.contains("parser")) {
      const auto& p = j.at("parser");
      if (p.contains("kind")) c.parser.kind = parser_kind_from_string(p.at("kind").get<std::string>());
      c.parser.drain_depth = p.value("drain_depth", c.parser.drain_depth);
      c.parser.drain_similarity_threshold = p.value("drain_similarity_threshold", c.parser.drain_similarity_threshold);
      c.parser.drain_max_children = p.value("drain_max_children", c.parser.drain_max_children);
    }
    if (j.contains("subgroup") && !j.at("subgroup").is_null()) {
      const auto& s = j.at("subgroup");
      SubgroupSpec spec;
      if (s.contains("kind")) spec.kind = subgroup_kind_from_string(s.at("kind").get<std::string>());
      spec.frequency_fraction = s.value("frequency_fraction", spec.frequency_fraction);
      c.subgroup = spec;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config file: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// "default", "legacy", "none", "loghub:<Dataset>" or a catalog JSON path.
inline RuleCatalog resolve_catalog(const std::string& spec) {
  if (spec.empty() || spec == "default") return default_catalog();
  if (spec == "legacy") return loghub_legacy_catalog();
  if (spec == "none") return default_catalog().with_all_disabled().with_provenance("none");
  if (spec.rfind("loghub:", 0) == 0) return loghub_domain_catalog(spec.substr(7));
  return load_catalog(spec);
}

// Structured CSV (LineId, Content) unless a log format is given.
inline std::vector<LogRecord> load_records(const std::string& path, const std::string& log_format) {
  if (!log_format.empty()) {
    auto log = parse_raw_log(path, log_format);
    if (log.malformed_lines > 0)
      std::clog << "warning: " << log.malformed_lines << " line(s) did not fit the log format\n";
    return std::move(log.records);
  }
  const auto table = csv::read_file(path);
  const ColumnMapping cols;
  const auto id_col = table.column(cols.line_id);
  const auto content_col = table.column(cols.content);
  if (!id_col) throw SchemaError("missing required column '" + cols.line_id + "'");
  if (!content_col) throw SchemaError("missing required column '" + cols.content + "'");
  std::vector<LogRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    LogRecord rec;
    rec.line_id = parse_line_id(table.rows[r][*id_col], r + 1);
    rec.content = table.rows[r][*content_col];
    rec.raw_line = rec.content;
    records.push_back(std::move(rec));
  }
  return records;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::filesystem::path prepare_out_dir(const RunConfig& c) {
  std::filesystem::path dir(c.output_dir.empty() ? "." : c.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

inline bool want_json(const RunConfig& c) { return c.format == "json" || c.format == "both"; }
inline bool want_csv(const RunConfig& c) { return c.format == "csv" || c.format == "both"; }

inline void require_input(const RunConfig& c) {
  if (c.dataset_path.empty()) throw ConfigError("--input is required");
}

inline void require_truth(const RunConfig& c) {
  if (c.ground_truth_path.empty()) throw ConfigError("this command requires --truth");
}

inline std::string dataset_label(const RunConfig& c) {
  if (!c.dataset_name.empty()) return c.dataset_name;
  const auto& src = c.dataset_path.empty() ? c.ground_truth_path : c.dataset_path;
  return std::filesystem::path(src).stem().string();
}

inline std::string configuration_label(const RunConfig& c, const RuleCatalog& catalog) {
  std::string label(to_string(c.parser.kind));
  label += "+" + (catalog.enabled_count() == 0 ? std::string("none") : catalog.provenance());
  return label;
}

inline PreprocessOptions preprocess_options(const RunConfig& c) {
  return {c.applicability_prefix, c.applicability_filter};
}

// Parses the input named by the config, or the truth CSV's content when no
// input is given.
inline ParseOutcome run_parser(const RunConfig& c, const RuleCatalog& catalog) {
  const auto& src = c.dataset_path.empty() ? c.ground_truth_path : c.dataset_path;
  const auto records = load_records(src, c.dataset_path.empty() ? std::string() : c.log_format);
  return parse_with_preprocessing(records, catalog, c.parser, preprocess_options(c));
}

inline ParseOutcome prediction_for(const RunConfig& c, const RuleCatalog& catalog) {
  if (!c.prediction_path.empty()) return outcome_from_structured_csv(csv::read_file(c.prediction_path));
  return run_parser(c, catalog);
}

}  // namespace detail

inline void cmd_preprocess(const RunConfig& c) {
  detail::require_input(c);
  const auto records = load_records(c.dataset_path, c.log_format);
  std::vector<std::string> contents;
  contents.reserve(records.size());
  for (const auto& r : records) contents.push_back(r.content);

  RuleCatalog effective = resolve_catalog(c.catalog_path);
  if (c.applicability_filter) {
    auto est = estimate_applicability(contents, effective, c.applicability_prefix);
    if (est.empty_input) std::clog << "warning: empty input, applicability filter skipped\n";
    effective = std::move(est.catalog);
  }
  const auto dir = detail::prepare_out_dir(c);
  detail::write_file(dir / "masked.log", [&](std::ostream& out) {
    for (const auto& line : contents) out << apply_masks(line, effective) << '\n';
  });
  save_catalog(effective, (dir / "catalog.json").string());
}

inline void cmd_parse(const RunConfig& c) {
  detail::require_input(c);
  const auto outcome = detail::run_parser(c, resolve_catalog(c.catalog_path));
  const auto dir = detail::prepare_out_dir(c);
  detail::write_file(dir / "structured.csv", [&](std::ostream& out) { write_structured_csv(out, outcome); });
  detail::write_file(dir / "templates.csv", [&](std::ostream& out) { write_templates_csv(out, outcome); });
  if (outcome.effective_catalog) save_catalog(*outcome.effective_catalog, (dir / "catalog.json").string());
}

inline EvaluationReport evaluate_config(const RunConfig& c, std::span<const SubgroupSpec> specs, std::string& config_label) {
  detail::require_truth(c);
  const auto truth = load_structured_csv(c.ground_truth_path);
  const auto catalog = resolve_catalog(c.catalog_path);
  const auto pred = detail::prediction_for(c, catalog);
  config_label = detail::configuration_label(c, pred.effective_catalog.value_or(catalog));
  return evaluate(pred, truth, specs);
}

inline void cmd_evaluate(const RunConfig& c) {
  std::vector<SubgroupSpec> specs;
  if (c.subgroup) specs.push_back(*c.subgroup);
  std::string label;
  const auto report = evaluate_config(c, specs, label);
  const auto dir = detail::prepare_out_dir(c);
  const auto dataset = detail::dataset_label(c);
  if (detail::want_json(c)) {
    auto j = report_to_json(report);
    j["dataset"] = dataset;
    j["configuration"] = label;
    detail::write_file(dir / "report.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }
  if (detail::want_csv(c)) {
    detail::write_file(dir / "report.csv", [&](std::ostream& out) {
      write_report_csv_header(out);
      write_report_csv_row(out, dataset, label, report);
    });
  }
}

inline void cmd_match_stats(const RunConfig& c) {
  const auto& src = c.ground_truth_path.empty() ? c.dataset_path : c.ground_truth_path;
  if (src.empty()) throw ConfigError("match-stats requires --truth (a structured CSV with templates)");
  const auto entries = load_structured_csv(src);
  const auto report = match_statistics(entries, resolve_catalog(c.catalog_path));
  const auto dir = detail::prepare_out_dir(c);
  if (detail::want_json(c))
    detail::write_file(dir / "match_report.json",
                       [&](std::ostream& out) { out << match_report_to_json(report).dump(2) << '\n'; });
  if (detail::want_csv(c))
    detail::write_file(dir / "match_report.csv", [&](std::ostream& out) { write_match_report_csv(out, report); });
}

inline void cmd_subgroup_report(const RunConfig& c) {
  const SubgroupSpec spec = c.subgroup.value_or(SubgroupSpec{});
  const std::vector<SubgroupSpec> specs{spec};
  std::string label;
  const auto report = evaluate_config(c, specs, label);
  const auto dir = detail::prepare_out_dir(c);
  const std::string stem = "subgroups_" + std::string(to_string(spec.kind));
  if (detail::want_json(c)) {
    auto j = report_to_json(report);
    j["dataset"] = detail::dataset_label(c);
    j["configuration"] = label;
    j["subgroup_kind"] = std::string(to_string(spec.kind));
    detail::write_file(dir / (stem + ".json"), [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }
  if (detail::want_csv(c))
    detail::write_file(dir / (stem + ".csv"), [&](std::ostream& out) { write_bands_csv(out, report); });
}

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return 1;
  if (dynamic_cast<const InputMismatchError*>(&e)) return 3;
  if (dynamic_cast<const Error*>(&e)) return 2;
  return 1;
}

// `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Log preprocessing, parsing and evaluation toolkit", "logprep"};
  app.require_subcommand(1);

  std::string config_file;
  std::string input, truth, prediction, log_format, catalog, parser, subgroup, out_dir, format, dataset_name;
  unsigned drain_depth = 0, drain_max_children = 0;
  double drain_st = 0.0, fraction = 0.0;
  std::size_t prefix = 0;
  bool no_filter = false;

  struct Bound {
    CLI::App* cmd;
    std::function<void(const RunConfig&)> action;
  };
  std::vector<Bound> commands;
  auto add_command = [&](const std::string& name, const std::string& help,
                         std::function<void(const RunConfig&)> action) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_file, "JSON run configuration; flags override it");
    sub->add_option("--input", input, "structured CSV (LineId, Content) or raw log with --log-format");
    sub->add_option("--truth", truth, "ground-truth structured CSV (LineId, Content, EventTemplate)");
    sub->add_option("--log-format", log_format, "header format, e.g. \"<Date> <Time> <Level> <Content>\"");
    sub->add_option("--catalog", catalog, "default | legacy | none | loghub:<Dataset> | path to catalog JSON");
    sub->add_option("--parser", parser, "drain or lfa")->check(CLI::IsMember({"drain", "lfa"}));
    sub->add_option("--drain-depth", drain_depth, "Drain tree depth (>= 3)");
    sub->add_option("--drain-st", drain_st, "Drain similarity threshold");
    sub->add_option("--drain-max-children", drain_max_children, "Drain max children per node");
    sub->add_option("--prefix", prefix, "lines used for applicability estimation");
    sub->add_flag("--no-applicability-filter", no_filter, "keep every enabled rule");
    sub->add_option("--subgroup", subgroup, "frequency or complexity")->check(CLI::IsMember({"frequency", "complexity"}));
    sub->add_option("--fraction", fraction, "frequency band fraction in (0, 0.5]");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv", "both"}));
    sub->add_option("--prediction", prediction, "evaluate an existing structured CSV instead of parsing");
    sub->add_option("--dataset-name", dataset_name, "dataset label used in reports");
    commands.push_back({sub, std::move(action)});
  };
  add_command("preprocess", "mask variables; writes masked.log and catalog.json", cmd_preprocess);
  add_command("parse", "mask then parse; writes structured.csv and templates.csv", cmd_parse);
  add_command("evaluate", "parse and score against ground truth; writes report.json/csv", cmd_evaluate);
  add_command("match-stats", "rule match precision/recall; writes match_report.json/csv", cmd_match_stats);
  add_command("subgroup-report", "per-band metrics; writes subgroups_<kind>.json/csv", cmd_subgroup_report);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& c : commands) {
      if (!c.cmd->parsed()) continue;
      RunConfig cfg = config_file.empty() ? RunConfig{} : load_config(config_file);
      auto given = [&](const char* flag) { return c.cmd->count(flag) > 0; };
      if (given("--input")) cfg.dataset_path = input;
      if (given("--truth")) cfg.ground_truth_path = truth;
      if (given("--prediction")) cfg.prediction_path = prediction;
      if (given("--log-format")) cfg.log_format = log_format;
      if (given("--catalog")) cfg.catalog_path = catalog;
      if (given("--parser")) cfg.parser.kind = parser_kind_from_string(parser);
      if (given("--drain-depth")) cfg.parser.drain_depth = drain_depth;
      if (given("--drain-st")) cfg.parser.drain_similarity_threshold = drain_st;
      if (given("--drain-max-children")) cfg.parser.drain_max_children = drain_max_children;
      if (given("--prefix")) cfg.applicability_prefix = prefix;
      if (no_filter) cfg.applicability_filter = false;
      if (given("--subgroup") || given("--fraction")) {
        SubgroupSpec spec = cfg.subgroup.value_or(SubgroupSpec{});
        if (given("--subgroup")) spec.kind = subgroup_kind_from_string(subgroup);
        if (given("--fraction")) spec.frequency_fraction = fraction;
        cfg.subgroup = spec;
      }
      if (given("--out")) cfg.output_dir = out_dir;
      if (given("--format")) cfg.format = format;
      if (given("--dataset-name")) cfg.dataset_name = dataset_name;

      if (cfg.format != "json" && cfg.format != "csv" && cfg.format != "both")
        throw ConfigError("format must be json, csv or both");
      cfg.parser.validate();
      if (cfg.subgroup) cfg.subgroup->validate();
      if (cfg.applicability_prefix < 1) throw ConfigError("applicability prefix must be at least 1");

      const auto started = std::chrono::steady_clock::now();
      c.action(cfg);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      err << c.cmd->get_name() << ": done in " << elapsed.count() << " s\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace logprep::cli
