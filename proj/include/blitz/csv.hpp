#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "blitz/schema.hpp"

namespace blitz {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC-4180-style parser: quoted fields may contain commas, quotes ("") and
// line breaks. The first record is the header.
inline CsvTable read_csv(std::string_view text) {
  CsvTable out;
  std::vector<std::string> record;
  std::string field;
  size_t line = 1, col = 1;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool any_field = false;

  auto fail = [&](const std::string& msg) {
    raise(Errc::ParseError,
          "csv parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
              ": " + msg);
  };
  auto end_field = [&]() {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
    any_field = true;
  };
  auto end_record = [&]() {
    end_field();
    if (out.header.empty()) {
      out.header = std::move(record);
    } else {
      if (record.size() != out.header.size())
        fail("expected " + std::to_string(out.header.size()) + " fields, got " +
             std::to_string(record.size()));
      out.rows.push_back(std::move(record));
    }
    record.clear();
    any_field = false;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
          col += 2;
        } else {
          in_quotes = false;
          ++col;
        }
      } else {
        field.push_back(c);
        if (c == '\n') ++line, col = 1;
        else ++col;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) fail("quote inside unquoted field");
        in_quotes = true;
        field_was_quoted = true;
        ++col;
        break;
      case ',':
        end_field();
        ++col;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;  // handled by \n
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        col = 1;
        break;
      default:
        field.push_back(c);
        ++col;
    }
  }
  if (in_quotes) fail("unterminated quoted field");
  if (any_field || !field.empty()) end_record();
  if (out.header.empty()) raise(Errc::ParseError, "csv has no header row");
  return out;
}

inline void write_csv_field(std::ostream& os, std::string_view v) {
  bool quote = v.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!quote) {
    os << v;
    return;
  }
  os << '"';
  for (char c : v) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

inline void write_csv_record(std::ostream& os, std::span<const std::string> fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    write_csv_field(os, fields[i]);
  }
  os << '\n';
}

namespace detail {

inline bool parse_i64(std::string_view s, i64& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool canonical_i64(std::string_view s) {
  i64 v;
  if (!parse_i64(s, v)) return false;
  return std::to_string(v) == s;
}

inline bool parse_double(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

// Kind inference: a column whose cells are all canonical integers is
// integer; all finite numbers, floating; few distinct values relative to the
// row count, categorical; anything else, string.
inline TableSchema infer_schema(const CsvTable& csv, double categorical_ratio = 0.1) {
  std::vector<ColumnSpec> cols;
  for (size_t c = 0; c < csv.header.size(); ++c) {
    ColumnSpec spec;
    spec.name = csv.header[c];
    bool all_int = !csv.rows.empty();
    bool all_num = !csv.rows.empty();
    std::unordered_set<std::string_view> distinct;
    for (const auto& row : csv.rows) {
      const std::string& cell = row[c];
      if (all_int && !detail::canonical_i64(cell)) all_int = false;
      double d;
      if (all_num && !detail::parse_double(cell, d)) all_num = false;
      distinct.insert(cell);
    }
    if (all_int) {
      spec.kind = ColumnKind::Integer;
    } else if (all_num) {
      spec.kind = ColumnKind::Floating;
    } else if (!csv.rows.empty() &&
               static_cast<double>(distinct.size()) <= categorical_ratio * csv.rows.size()) {
      spec.kind = ColumnKind::Categorical;
    } else {
      spec.kind = ColumnKind::String;
    }
    cols.push_back(std::move(spec));
  }
  return TableSchema(std::move(cols));
}

inline Tuple row_to_tuple(const TableSchema& schema, std::span<const std::string> row) {
  Tuple t;
  t.reserve(schema.column_count());
  for (size_t c = 0; c < schema.column_count(); ++c) {
    switch (schema.column(c).kind) {
      case ColumnKind::Integer: {
        i64 v;
        if (!detail::parse_i64(row[c], v))
          raise(Errc::SchemaError, "cell is not an integer: '" + row[c] + "' in column " +
                                       schema.column(c).name);
        t.emplace_back(v);
        break;
      }
      case ColumnKind::Floating: {
        double v;
        if (!detail::parse_double(row[c], v))
          raise(Errc::SchemaError, "cell is not numeric: '" + row[c] + "' in column " +
                                       schema.column(c).name);
        t.emplace_back(v);
        break;
      }
      case ColumnKind::Categorical:
      case ColumnKind::String:
        t.emplace_back(row[c]);
        break;
    }
  }
  return t;
}

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

inline std::vector<std::string> tuple_to_row(const TableSchema& schema, const Tuple& t) {
  std::vector<std::string> row;
  row.reserve(t.size());
  for (size_t c = 0; c < t.size(); ++c) {
    switch (schema.column(c).kind) {
      case ColumnKind::Integer: row.push_back(std::to_string(std::get<i64>(t[c]))); break;
      case ColumnKind::Floating: row.push_back(format_double(std::get<double>(t[c]))); break;
      case ColumnKind::Categorical:
      case ColumnKind::String: row.push_back(std::get<std::string>(t[c])); break;
    }
  }
  return row;
}

}  // namespace blitz
