#pragma once

// Loghub-style dataset ingestion and template-driven variable extraction.

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/regex.hpp>

#include "logprep/csv.hpp"
#include "logprep/error.hpp"

namespace logprep {

inline constexpr std::string_view kPlaceholder = "<*>";

using LineId = std::uint64_t;

struct LogRecord {
  LineId line_id = 0;
  std::string raw_line;
  std::string content;
  std::map<std::string, std::string> header_fields;
};

struct VariableOccurrence {
  std::string text;
  std::size_t start = 0;  // [start, end) into the owning content
  std::size_t end = 0;
  std::size_t placeholder_index = 0;

  friend bool operator==(const VariableOccurrence&, const VariableOccurrence&) = default;
};

struct GroundTruthEntry {
  LineId line_id = 0;
  std::string content;
  std::string template_text;
  std::vector<VariableOccurrence> variables;
  // Template could not be aligned with content; variables is empty.
  bool extraction_failed = false;
};

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::size_t count_placeholders(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kPlaceholder); pos != std::string_view::npos;
       pos = text.find(kPlaceholder, pos + kPlaceholder.size()))
    ++n;
  return n;
}

// Substitutes values into the placeholders of `tmpl`, left to right.
inline std::string fill_template(std::string_view tmpl, std::span<const std::string> values) {
  std::string out;
  std::size_t next = 0;
  std::size_t pos = 0;
  while (true) {
    const auto hit = tmpl.find(kPlaceholder, pos);
    if (hit == std::string_view::npos || next == values.size()) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(values[next++]);
    pos = hit + kPlaceholder.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

// ---------------------------------------------------------------------------
// Template matching

enum class Greediness { lazy, greedy };

// Compiled form of a ground-truth template. Literal text must match exactly,
// a whitespace run matches any non-empty whitespace run, and each `<*>` is a
// capture that may be empty.
//
// Matching follows backtracking-regex semantics for the equivalent anchored
// pattern (see pattern()): whitespace runs are greedy and captures are lazy
// or greedy depending on the requested mode. Failures are memoised per
// (element, offset) so adversarial templates stay polynomial.
class TemplateMatcher {
 public:
  struct Span {
    std::size_t start = 0;
    std::size_t end = 0;
    friend bool operator==(const Span&, const Span&) = default;
  };

  explicit TemplateMatcher(std::string_view tmpl) {
    std::size_t i = 0;
    while (i < tmpl.size()) {
      if (tmpl.substr(i, kPlaceholder.size()) == kPlaceholder) {
        elements_.push_back({Kind::capture, {}});
        ++captures_;
        i += kPlaceholder.size();
      } else if (is_space(tmpl[i])) {
        while (i < tmpl.size() && is_space(tmpl[i])) ++i;
        elements_.push_back({Kind::whitespace, {}});
      } else {
        if (elements_.empty() || elements_.back().kind != Kind::literal)
          elements_.push_back({Kind::literal, {}});
        elements_.back().text.push_back(tmpl[i++]);
      }
    }
  }

  std::size_t placeholder_count() const { return captures_; }

  // Equivalent anchored Perl-syntax regex for the lazy mode.
  std::string pattern() const {
    std::string out = "^";
    for (const auto& e : elements_) {
      switch (e.kind) {
        case Kind::capture: out += "(.*?)"; break;
        case Kind::whitespace: out += "\\s+"; break;
        case Kind::literal:
          for (char c : e.text) {
            if (std::string_view("\\^$.|?*+()[]{}/").find(c) != std::string_view::npos)
              out.push_back('\\');
            out.push_back(c);
          }
          break;
      }
    }
    return out + "$";
  }

  std::optional<std::vector<Span>> match(std::string_view content,
                                         Greediness mode = Greediness::lazy) const {
    Search s{*this, content, mode, {}, {}};
    s.failed.assign((elements_.size() + 1) * (content.size() + 1), 0);
    s.spans.resize(captures_);
    if (!s.run(0, 0, 0)) return std::nullopt;
    return std::move(s.spans);
  }

 private:
  enum class Kind { literal, whitespace, capture };
  struct Element {
    Kind kind;
    std::string text;
  };

  struct Search {
    const TemplateMatcher& m;
    std::string_view content;
    Greediness mode;
    std::vector<char> failed;
    std::vector<Span> spans;

    bool run(std::size_t el, std::size_t pos, std::size_t cap) {
      const std::size_t n = content.size();
      if (el == m.elements_.size()) return pos == n;
      char& memo = failed[el * (n + 1) + pos];
      if (memo) return false;

      const Element& e = m.elements_[el];
      bool ok = false;
      switch (e.kind) {
        case Kind::literal:
          ok = content.substr(pos, e.text.size()) == e.text && run(el + 1, pos + e.text.size(), cap);
          break;
        case Kind::whitespace: {
          std::size_t end = pos;
          while (end < n && is_space(content[end])) ++end;
          for (std::size_t stop = end; stop > pos && !ok; --stop) ok = run(el + 1, stop, cap);
          break;
        }
        case Kind::capture:
          if (mode == Greediness::lazy) {
            for (std::size_t stop = pos; stop <= n && !ok; ++stop) ok = try_capture(el, pos, stop, cap);
          } else {
            for (std::size_t stop = n + 1; stop-- > pos && !ok;) ok = try_capture(el, pos, stop, cap);
          }
          break;
      }
      if (!ok) memo = 1;
      return ok;
    }

    bool try_capture(std::size_t el, std::size_t pos, std::size_t stop, std::size_t cap) {
      if (!run(el + 1, stop, cap + 1)) return false;
      spans[cap] = {pos, stop};
      return true;
    }
  };

  std::vector<Element> elements_;
  std::size_t captures_ = 0;
};

inline TemplateMatcher template_to_matcher(std::string_view tmpl) { return TemplateMatcher(tmpl); }

// Aligns `content` with `tmpl` and returns one occurrence per placeholder.
// Lazy captures are tried first, then greedy; nullopt when neither aligns.
inline std::optional<std::vector<VariableOccurrence>> extract_variables(std::string_view content,
                                                                        std::string_view tmpl) {
  const TemplateMatcher matcher(tmpl);
  auto spans = matcher.match(content, Greediness::lazy);
  if (!spans) spans = matcher.match(content, Greediness::greedy);
  if (!spans) return std::nullopt;

  std::vector<VariableOccurrence> out;
  out.reserve(spans->size());
  for (std::size_t i = 0; i < spans->size(); ++i) {
    const auto& s = (*spans)[i];
    out.push_back({std::string(content.substr(s.start, s.end - s.start)), s.start, s.end, i});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structured CSV

struct ColumnMapping {
  std::string line_id = "LineId";
  std::string content = "Content";
  std::string event_template = "EventTemplate";
};

inline LineId parse_line_id(const std::string& text, std::size_t row) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || v == 0 || text.front() == '-')
    throw SchemaError("CSV row " + std::to_string(row) + ": invalid line id '" + text + "'");
  return v;
}

inline std::vector<GroundTruthEntry> entries_from_table(const csv::Table& table,
                                                        const ColumnMapping& cols = {}) {
  auto need = [&](const std::string& name) {
    const auto idx = table.column(name);
    if (!idx) throw SchemaError("missing required column '" + name + "'");
    return *idx;
  };
  const std::size_t id_col = need(cols.line_id);
  const std::size_t content_col = need(cols.content);
  const std::size_t tmpl_col = need(cols.event_template);

  std::vector<GroundTruthEntry> entries;
  entries.reserve(table.rows.size());
  std::set<LineId> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    GroundTruthEntry e;
    e.line_id = parse_line_id(row[id_col], r + 1);
    if (!seen.insert(e.line_id).second)
      throw SchemaError("CSV row " + std::to_string(r + 1) + ": duplicate line id " + row[id_col]);
    e.content = row[content_col];
    e.template_text = row[tmpl_col];
    if (auto vars = extract_variables(e.content, e.template_text))
      e.variables = std::move(*vars);
    else
      e.extraction_failed = true;
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<GroundTruthEntry> load_structured_csv(const std::string& path,
                                                         const ColumnMapping& cols = {}) {
  return entries_from_table(csv::read_file(path), cols);
}

inline std::size_t count_failed(std::span<const GroundTruthEntry> entries) {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.extraction_failed ? 1 : 0;
  return n;
}

// line_id, placeholder_index, start, end, text
inline void write_variables_csv(std::ostream& out, std::span<const GroundTruthEntry> entries) {
  csv::write_row(out, {"line_id", "placeholder_index", "start", "end", "text"});
  for (const auto& e : entries)
    for (const auto& v : e.variables)
      csv::write_row(out, {std::to_string(e.line_id), std::to_string(v.placeholder_index),
                           std::to_string(v.start), std::to_string(v.end), v.text});
}

// ---------------------------------------------------------------------------
// Raw logs with a header format such as "<Date> <Time> <Level> <Content>".
// Follows the Loghub convention: text between fields is a regex fragment in
// which runs of spaces match runs of whitespace, so formats like
// "<Component>(\\[<PID>\\])?: <Content>" work unchanged.

class LogFormat {
 public:
  explicit LogFormat(std::string_view format) : source_(format) {
    static const boost::regex field_re(R"(<([^<>]+)>)");
    static const boost::regex spaces_re(" +");
    std::string pattern = "^";
    bool content_seen = false;
    auto literal_start = source_.cbegin();
    for (boost::sregex_iterator it(source_.cbegin(), source_.cend(), field_re), last; it != last; ++it) {
      const auto& m = *it;
      const std::string literal(literal_start, m[0].first);
      if (content_seen) throw ConfigError("<Content> must be the last field of the log format");
      pattern += boost::regex_replace(literal, spaces_re, "\\\\s+");
      const std::string name = m[1].str();
      if (name == "Content") {
        content_seen = true;
      } else {
        if (!boost::regex_match(name, boost::regex(R"(\w+)")))
          throw ConfigError("log format field names must be alphanumeric: '<" + name + ">'");
        fields_.push_back(name);
      }
      pattern += "(?<" + name + ">.*?)";
      literal_start = m[0].second;
    }
    if (!content_seen) throw ConfigError("log format must contain a <Content> field: '" + source_ + "'");
    for (auto it = literal_start; it != source_.cend(); ++it)
      if (!is_space(*it)) throw ConfigError("<Content> must be the last field of the log format");
    pattern += "$";
    try {
      regex_.assign(pattern, boost::regex::perl);
    } catch (const boost::regex_error& e) {
      throw ConfigError("log format does not compile: " + std::string(e.what()));
    }
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& fields() const { return fields_; }

  // Returns false when the line does not fit the format.
  bool split(std::string_view line, LogRecord& record) const {
    boost::match_results<std::string_view::const_iterator> m;
    if (!boost::regex_match(line.begin(), line.end(), m, regex_)) return false;
    for (const auto& f : fields_) record.header_fields[f] = m[f].str();
    record.content = m["Content"].str();
    return true;
  }

 private:
  std::string source_;
  std::vector<std::string> fields_;
  boost::regex regex_;
};

struct RawLog {
  std::vector<LogRecord> records;
  std::size_t malformed_lines = 0;
};

inline RawLog parse_raw_log(std::istream& in, const LogFormat& format) {
  RawLog log;
  std::string line;
  LineId id = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LogRecord rec;
    rec.line_id = ++id;
    rec.raw_line = line;
    if (!format.split(rec.raw_line, rec)) {
      rec.header_fields.clear();
      rec.content = rec.raw_line;
      ++log.malformed_lines;
    }
    log.records.push_back(std::move(rec));
  }
  return log;
}

inline RawLog parse_raw_log(const std::string& path, std::string_view format) {
  const LogFormat fmt(format);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_raw_log(in, fmt);
}

}  // namespace logprep
