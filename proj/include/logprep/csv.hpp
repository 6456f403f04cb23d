#pragma once

// Minimal RFC 4180 reader/writer. Handles quoted fields with embedded
// separators, doubled quotes, line breaks inside quotes and CRLF endings,
// which covers the CSV files pandas writes for Loghub.

#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logprep/error.hpp"

namespace logprep::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  // 1-based physical line on which each row starts (header is line 1).
  std::vector<std::size_t> row_lines;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

namespace detail {

// Reads one record. Returns false at end of input. Throws SchemaError on an
// unterminated quoted field.
inline bool read_record(std::istream& in, Row& out, std::size_t& line_no) {
  out.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;

  const std::size_t start_line = line_no;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  char c = 0;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '\n') {
      ++line_no;
      if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
      out.push_back(std::move(field));
      return true;
    } else if (c == '\r' && in.peek() == '\n') {
      // swallowed; the '\n' ends the record
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes)
    throw SchemaError("CSV line " + std::to_string(start_line) + ": unterminated quoted field");
  out.push_back(std::move(field));
  ++line_no;
  return true;
}

}  // namespace detail

inline Table read(std::istream& in) {
  Table table;
  std::size_t line_no = 1;
  if (!detail::read_record(in, table.header, line_no))
    throw SchemaError("CSV input is empty; a header row is required");
  // Strip a UTF-8 byte order mark from the first column name.
  if (!table.header.empty() && table.header[0].starts_with("\xEF\xBB\xBF"))
    table.header[0].erase(0, 3);

  Row row;
  std::size_t row_start = line_no;
  while (detail::read_record(in, row, line_no)) {
    if (row.size() == 1 && row[0].empty()) {  // blank line
      row_start = line_no;
      continue;
    }
    if (row.size() != table.header.size()) {
      throw SchemaError("CSV row " + std::to_string(table.rows.size() + 1) + " (line " +
                        std::to_string(row_start) + "): expected " +
                        std::to_string(table.header.size()) + " fields, found " +
                        std::to_string(row.size()));
    }
    table.rows.push_back(row);
    table.row_lines.push_back(row_start);
    row_start = line_no;
  }
  return table;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read(in);
}

inline std::string quote(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

inline void write_row(std::ostream& out, std::initializer_list<std::string> fields) {
  write_row(out, std::span<const std::string>(fields.begin(), fields.size()));
}

}  // namespace logprep::csv
