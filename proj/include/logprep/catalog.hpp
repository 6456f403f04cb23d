#pragma once

// Masking rules and ordered rule catalogs, plus the built-in catalogs and
// their JSON file form.

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/regex.hpp>
#include <json.hpp>

#include "logprep/error.hpp"

namespace logprep {

enum class RuleCategory {
  hex_or_integer,
  float_numeric,
  time_duration,
  block_id,
  core_id,
  ipv4,
  ipv4_port,
  ipv6,
  mac_address,
  memory_size,
  package_or_domain,
  assigned_value,
  time,
  datetime_words,
  path,
  url,
};

inline constexpr std::array<std::pair<RuleCategory, std::string_view>, 16> kCategoryNames{{
    {RuleCategory::hex_or_integer, "hex_or_integer"},
    {RuleCategory::float_numeric, "float_numeric"},
    {RuleCategory::time_duration, "time_duration"},
    {RuleCategory::block_id, "block_id"},
    {RuleCategory::core_id, "core_id"},
    {RuleCategory::ipv4, "ipv4"},
    {RuleCategory::ipv4_port, "ipv4_port"},
    {RuleCategory::ipv6, "ipv6"},
    {RuleCategory::mac_address, "mac_address"},
    {RuleCategory::memory_size, "memory_size"},
    {RuleCategory::package_or_domain, "package_or_domain"},
    {RuleCategory::assigned_value, "assigned_value"},
    {RuleCategory::time, "time"},
    {RuleCategory::datetime_words, "datetime_words"},
    {RuleCategory::path, "path"},
    {RuleCategory::url, "url"},
}};

inline std::string_view to_string(RuleCategory c) {
  for (const auto& [cat, name] : kCategoryNames)
    if (cat == c) return name;
  return "unknown";
}

inline std::optional<RuleCategory> category_from_string(std::string_view name) {
  for (const auto& [cat, n] : kCategoryNames)
    if (n == name) return cat;
  return std::nullopt;
}

struct MaskRule {
  std::string name;
  RuleCategory category = RuleCategory::hex_or_integer;
  std::string pattern;
  std::string mask = "<*>";
  unsigned order = 0;  // lower applies first
  bool enabled = true;

  friend bool operator==(const MaskRule&, const MaskRule&) = default;
};

// Ordered, validated collection of rules. Patterns are compiled once at
// construction and shared between copies, so copying a catalog is cheap.
class RuleCatalog {
 public:
  RuleCatalog() : compiled_(std::make_shared<const std::vector<boost::regex>>()) {}

  RuleCatalog(std::vector<MaskRule> rules, std::string provenance)
      : rules_(std::move(rules)), provenance_(std::move(provenance)) {
    std::stable_sort(rules_.begin(), rules_.end(),
                     [](const MaskRule& a, const MaskRule& b) { return a.order < b.order; });
    std::set<std::string> names;
    std::vector<boost::regex> compiled;
    compiled.reserve(rules_.size());
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      const auto& r = rules_[i];
      if (r.name.empty()) throw ValidationError("rule at order " + std::to_string(r.order) + " has no name");
      if (!names.insert(r.name).second) throw ValidationError("duplicate rule name '" + r.name + "'");
      if (i > 0 && rules_[i - 1].order == r.order)
        throw ValidationError("rules '" + rules_[i - 1].name + "' and '" + r.name + "' share order " +
                              std::to_string(r.order));
      if (r.mask.find("<*>") == std::string::npos)
        throw ValidationError("rule '" + r.name + "': mask must contain <*>");
      try {
        compiled.emplace_back(r.pattern, boost::regex::perl);
      } catch (const boost::regex_error& e) {
        throw ValidationError("rule '" + r.name + "': pattern does not compile: " + e.what());
      }
    }
    compiled_ = std::make_shared<const std::vector<boost::regex>>(std::move(compiled));
  }

  const std::vector<MaskRule>& rules() const { return rules_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return rules_.size(); }
  const boost::regex& regex(std::size_t i) const { return (*compiled_)[i]; }

  std::size_t enabled_count() const {
    return static_cast<std::size_t>(
        std::count_if(rules_.begin(), rules_.end(), [](const MaskRule& r) { return r.enabled; }));
  }

  const MaskRule* find(std::string_view name) const {
    for (const auto& r : rules_)
      if (r.name == name) return &r;
    return nullptr;
  }

  // Copy with one rule toggled. Throws ValidationError for unknown names.
  RuleCatalog with_enabled(std::string_view name, bool enabled) const {
    RuleCatalog copy = *this;
    for (auto& r : copy.rules_) {
      if (r.name == name) {
        r.enabled = enabled;
        return copy;
      }
    }
    throw ValidationError("no rule named '" + std::string(name) + "'");
  }

  RuleCatalog with_all_disabled() const {
    RuleCatalog copy = *this;
    for (auto& r : copy.rules_) r.enabled = false;
    return copy;
  }

  RuleCatalog with_provenance(std::string provenance) const {
    RuleCatalog copy = *this;
    copy.provenance_ = std::move(provenance);
    return copy;
  }

  // Catalogs compare by their rules; provenance is a label only.
  friend bool operator==(const RuleCatalog& a, const RuleCatalog& b) { return a.rules_ == b.rules_; }

 private:
  std::vector<MaskRule> rules_;
  std::string provenance_;
  std::shared_ptr<const std::vector<boost::regex>> compiled_;
};

// ---------------------------------------------------------------------------
// Built-in catalogs

namespace patterns {

inline const std::string kHex4 = "[0-9A-Fa-f]{1,4}";

inline std::string ipv6() {
  const std::string h = kHex4;
  return "(?<![\\w:.])(?:"
         "(?:" + h + ":){7}" + h +
         "|(?:" + h + ":){1,6}:" + h +
         "|(?:" + h + ":){1,5}(?::" + h + "){1,2}"
         "|(?:" + h + ":){1,4}(?::" + h + "){1,3}"
         "|(?:" + h + ":){1,3}(?::" + h + "){1,4}"
         "|(?:" + h + ":){1,2}(?::" + h + "){1,5}"
         "|" + h + ":(?::" + h + "){1,6}"
         "|::(?:" + h + ":){0,5}" + h +
         "|(?:" + h + ":){1,7}:"
         ")(?:%\\w+)?(?![\\w:])";
}

}  // namespace patterns

// The refined catalog: 15 enabled rules covering the generalizable variable
// categories, plus the two system-specific identifiers (HDFS block ids, BGL
// core ids) shipped disabled. Order values leave gaps for user insertions.
inline RuleCatalog default_catalog() {
  using C = RuleCategory;
  std::vector<MaskRule> rules{
      {"url", C::url, R"(\b[A-Za-z][A-Za-z0-9+.-]*://[^\s"'<>,]*[^\s"'<>,.;:)\]}])", "<*>", 10, true},
      {"mac_address", C::mac_address, R"((?<![\w:-])(?:[0-9A-Fa-f]{2}[:-]){5}[0-9A-Fa-f]{2}(?![\w:-]))", "<*>", 20, true},
      {"ipv6", C::ipv6, patterns::ipv6(), "<*>", 30, true},
      {"ipv4_port", C::ipv4_port, R"((?<![\w.])(?:\d{1,3}\.){3}\d{1,3}:\d{1,5}\b)", "<*>", 40, true},
      {"ipv4", C::ipv4, R"((?<![\w.])(?:\d{1,3}\.){3}\d{1,3}\b(?!\.\d))", "<*>", 50, true},
      {"block_id", C::block_id, R"(blk_-?\d+)", "<*>", 60, false},
      {"core_id", C::core_id, R"(core\.\d+)", "<*>", 70, false},
      {"path", C::path, R"((?<![\w./-])(?:/[\w.@+$%~-]+)+/?)", "<*>", 80, true},
      {"package_or_domain", C::package_or_domain, R"((?<![\w.$-])(?:[\w-]+\.){2,}[\w-]+(?:\$[\w-]+)*(?::\d+)?\b)", "<*>", 90, true},
      {"memory_size", C::memory_size, R"((?<![\w.])\d+(?:\.\d+)?(?:[KMGTPkmgtp]i?[Bb])\b)", "<*>", 100, true},
      {"time_duration", C::time_duration, R"((?<![\w.])(?:<\d+\s?sec|\d+(?:\.\d+)?(?:ms|msec|us|ns|s|sec|secs|min|mins)\b))", "<*>", 110, true},
      {"time", C::time, R"(\b\d{1,2}:\d{2}(?::\d{2})?(?:[.,]\d+)?\b)", "<*>", 120, true},
      {"month_name", C::datetime_words, R"(\b(?:Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|June?|July?|Aug(?:ust)?|Sep(?:t|tember)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)\b)", "<*>", 130, true},
      {"weekday_name", C::datetime_words, R"(\b(?:Mon(?:day)?|Tue(?:s|sday)?|Wed(?:nesday)?|Thu(?:r|rs|rsday)?|Fri(?:day)?|Sat(?:urday)?|Sun(?:day)?)\b)", "<*>", 140, true},
      {"float_numeric", C::float_numeric, R"((?<![\w.])[-+]?\d+\.\d+(?:[eE][-+]?\d+)?\b(?!\.\d))", "<*>", 150, true},
      {"assigned_value", C::assigned_value, R"((?<==)[-+]?\d+(?:\.\d+)?\b)", "<*>", 160, true},
      {"hex_or_integer", C::hex_or_integer, R"(\b0[xX][0-9A-Fa-f]+\b|(?:(?<![\w.])[-+])?\b\d+\b|\b(?=[A-Fa-f]*\d)[0-9A-Fa-f]{4,}\b)", "<*>", 170, true},
  };
  return RuleCatalog(std::move(rules), "default");
}

// The ten de-duplicated preprocessing regexes shipped with the Loghub
// benchmark, verbatim, ordered specific-to-generic.
inline RuleCatalog loghub_legacy_catalog() {
  using C = RuleCategory;
  std::vector<MaskRule> rules{
      {"block_id", C::block_id, R"(blk_-?\d+)", "<*>", 0, true},
      {"ipv4", C::ipv4, R"((/|)(\d+\.){3}\d+)", "<*>", 1, true},
      {"path", C::path, R"((/.+?\s|(/[\w-]+)+))", "<*>", 2, true},
      {"package_or_domain", C::package_or_domain, R"(([\w-]+\.){2,}[\w-]+(:\d+)?)", "<*>", 3, true},
      {"core_id", C::core_id, R"(core\.\d+)", "<*>", 4, true},
      {"memory_size", C::memory_size, R"(\b[KGTM]?B\b)", "<*>", 5, true},
      {"time_duration", C::time_duration, R"(<\d+\ssec)", "<*>", 6, true},
      {"time", C::time, R"(\d{2}:\d{2}(:\d{2})*)", "<*>", 7, true},
      {"assigned_value", C::assigned_value, R"(=\d+)", "<*>", 8, true},
      {"hex_or_integer", C::hex_or_integer, R"(\b(\-?\+?\d+)\b|\b0[Xx][a-fA-F\d]+\b|\b[a-fA-F\d]{4,}\b)", "<*>", 9, true},
  };
  return RuleCatalog(std::move(rules), "loghub-legacy");
}

// Benchmark settings for one Loghub dataset: its domain-knowledge regexes
// (applied in the listed order) and the Drain parameters tuned for it.
struct LoghubDatasetSettings {
  std::string_view name;
  std::vector<std::pair<RuleCategory, std::string_view>> regexes;
  double drain_similarity_threshold;
  unsigned drain_depth;
};

inline const std::vector<LoghubDatasetSettings>& loghub_datasets() {
  using C = RuleCategory;
  static const std::vector<LoghubDatasetSettings> sets{
      {"HDFS", {{C::block_id, R"(blk_-?\d+)"}, {C::ipv4_port, R"((\d+\.){3}\d+(:\d+)?)"}}, 0.5, 4},
      {"Hadoop", {{C::ipv4, R"((\d+\.){3}\d+)"}}, 0.5, 4},
      {"Spark", {{C::ipv4, R"((\d+\.){3}\d+)"}, {C::memory_size, R"(\b[KGTM]?B\b)"}, {C::package_or_domain, R"(([\w-]+\.){2,}[\w-]+)"}}, 0.5, 4},
      {"Zookeeper", {{C::ipv4_port, R"((/|)(\d+\.){3}\d+(:\d+)?)"}}, 0.5, 4},
      {"BGL", {{C::core_id, R"(core\.\d+)"}}, 0.5, 4},
      {"HPC", {{C::assigned_value, R"(=\d+)"}}, 0.5, 4},
      {"Thunderbird", {{C::ipv4, R"((\d+\.){3}\d+)"}}, 0.5, 4},
      {"Linux", {{C::ipv4, R"((\d+\.){3}\d+)"}, {C::time, R"(\d{2}:\d{2}:\d{2})"}}, 0.39, 6},
      {"HealthApp", {}, 0.2, 4},
      {"Apache", {{C::ipv4, R"((\d+\.){3}\d+)"}}, 0.5, 4},
      {"Proxifier", {{C::time_duration, R"(<\d+\ssec)"}, {C::package_or_domain, R"(([\w-]+\.)+[\w-]+(:\d+)?)"}, {C::time, R"(\d{2}:\d{2}(:\d{2})*)"}, {C::memory_size, R"([KGTM]B)"}}, 0.6, 3},
      {"OpenSSH", {{C::ipv4, R"((\d+\.){3}\d+)"}, {C::package_or_domain, R"(([\w-]+\.){2,}[\w-]+)"}}, 0.6, 5},
      {"OpenStack", {{C::ipv4, R"(((\d+\.){3}\d+,?)+)"}, {C::path, R"(/.+?\s)"}, {C::hex_or_integer, R"(\d+)"}}, 0.5, 5},
      {"Mac", {{C::package_or_domain, R"(([\w-]+\.){2,}[\w-]+)"}}, 0.7, 6},
  };
  return sets;
}

inline const LoghubDatasetSettings* find_loghub_dataset(std::string_view name) {
  for (const auto& s : loghub_datasets())
    if (s.name == name) return &s;
  return nullptr;
}

// Domain-knowledge catalog of one Loghub dataset.
inline RuleCatalog loghub_domain_catalog(std::string_view dataset) {
  const auto* settings = find_loghub_dataset(dataset);
  if (!settings) throw ConfigError("unknown Loghub dataset '" + std::string(dataset) + "'");
  std::vector<MaskRule> rules;
  unsigned order = 0;
  for (const auto& [cat, pattern] : settings->regexes) {
    rules.push_back({std::string(to_string(cat)) + "_" + std::to_string(order), cat, std::string(pattern), "<*>",
                     order, true});
    ++order;
  }
  return RuleCatalog(std::move(rules), "loghub:" + std::string(dataset));
}

// ---------------------------------------------------------------------------
// JSON form: an array of {name, category, pattern, mask, order, enabled}.

inline nlohmann::json catalog_to_json(const RuleCatalog& catalog) {
  auto arr = nlohmann::json::array();
  for (const auto& r : catalog.rules()) {
    arr.push_back({{"name", r.name},
                   {"category", std::string(to_string(r.category))},
                   {"pattern", r.pattern},
                   {"mask", r.mask},
                   {"order", r.order},
                   {"enabled", r.enabled}});
  }
  return arr;
}

inline RuleCatalog catalog_from_json(const nlohmann::json& j, std::string provenance = "user") {
  if (!j.is_array()) throw SchemaError("catalog JSON must be an array of rule objects");
  std::vector<MaskRule> rules;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    const std::string where = "catalog rule #" + std::to_string(i);
    if (!o.is_object()) throw SchemaError(where + " is not an object");
    try {
      MaskRule r;
      r.name = o.at("name").get<std::string>();
      const auto cat_name = o.at("category").get<std::string>();
      const auto cat = category_from_string(cat_name);
      if (!cat) throw ValidationError("rule '" + r.name + "': unknown category '" + cat_name + "'");
      r.category = *cat;
      r.pattern = o.at("pattern").get<std::string>();
      r.mask = o.value("mask", std::string("<*>"));
      const auto order = o.at("order").get<long long>();
      if (order < 0) throw ValidationError("rule '" + r.name + "': order must be non-negative");
      r.order = static_cast<unsigned>(order);
      r.enabled = o.value("enabled", true);
      rules.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  return RuleCatalog(std::move(rules), std::move(provenance));
}

inline void save_catalog(const RuleCatalog& catalog, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << catalog_to_json(catalog).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline RuleCatalog load_catalog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
  return catalog_from_json(j, "user");
}

}  // namespace logprep
