#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "blitz/error.hpp"
#include "blitz/serialize.hpp"
#include "blitz/types.hpp"

namespace blitz {

enum class ColumnKind : u8 { Categorical, Integer, Floating, String };

inline const char* kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Integer: return "integer";
    case ColumnKind::Floating: return "floating";
    case ColumnKind::String: return "string";
  }
  return "?";
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::String;
  double precision = 0;  // floating columns; 0 = type default

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

using Value = std::variant<i64, double, std::string>;
using Tuple = std::vector<Value>;

class TableSchema {
 public:
  TableSchema() = default;
  explicit TableSchema(std::vector<ColumnSpec> cols) : cols_(std::move(cols)) {
    for (size_t i = 0; i < cols_.size(); ++i)
      for (size_t j = i + 1; j < cols_.size(); ++j)
        if (cols_[i].name == cols_[j].name)
          raise(Errc::SchemaError, "duplicate column name: " + cols_[i].name);
  }

  size_t column_count() const { return cols_.size(); }
  const ColumnSpec& column(size_t i) const { return cols_[i]; }
  const std::vector<ColumnSpec>& columns() const { return cols_; }

  void validate(const Tuple& t) const {
    if (t.size() != cols_.size()) raise(Errc::TypeMismatch, "tuple arity does not match schema");
    for (size_t i = 0; i < cols_.size(); ++i) {
      bool ok = false;
      switch (cols_[i].kind) {
        case ColumnKind::Integer: ok = std::holds_alternative<i64>(t[i]); break;
        case ColumnKind::Floating: ok = std::holds_alternative<double>(t[i]); break;
        case ColumnKind::Categorical:
        case ColumnKind::String: ok = std::holds_alternative<std::string>(t[i]); break;
      }
      if (!ok)
        raise(Errc::TypeMismatch, "column " + cols_[i].name + " expects " + kind_name(cols_[i].kind));
    }
  }

  void save(ByteWriter& w) const {
    w.put<u32>(static_cast<u32>(cols_.size()));
    for (const ColumnSpec& c : cols_) {
      w.put_string(c.name);
      w.put<u8>(static_cast<u8>(c.kind));
      w.put<double>(c.precision);
    }
  }

  static TableSchema load(ByteReader& r) {
    u32 n = r.get<u32>();
    std::vector<ColumnSpec> cols(n);
    for (ColumnSpec& c : cols) {
      c.name = r.get_string();
      c.kind = static_cast<ColumnKind>(r.get<u8>());
      c.precision = r.get<double>();
    }
    return TableSchema(std::move(cols));
  }

  friend bool operator==(const TableSchema&, const TableSchema&) = default;

 private:
  std::vector<ColumnSpec> cols_;
};

// Recovery check honoring the numeric contract: floating values match when
// they are within the column precision, everything else byte-exactly.
inline bool tuple_matches(const TableSchema& schema, const Tuple& a, const Tuple& b) {
  if (a.size() != b.size() || a.size() != schema.column_count()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (schema.column(i).kind == ColumnKind::Floating) {
      double x = std::get<double>(a[i]);
      double y = std::get<double>(b[i]);
      if (x == y) continue;
      double p = schema.column(i).precision > 0 ? schema.column(i).precision
                                                : kDoublePrecisionDefault;
      if (!(std::abs(x - y) < p)) return false;
    } else if (a[i] != b[i]) {
      return false;
    }
  }
  return true;
}

// Bytes a tuple would occupy uncompressed in a row store: 8 per numeric,
// length plus a terminator per text value.
inline u64 raw_tuple_bytes(const Tuple& t) {
  u64 bytes = 0;
  for (const Value& v : t) {
    if (std::holds_alternative<std::string>(v)) {
      bytes += std::get<std::string>(v).size() + 1;
    } else {
      bytes += 8;
    }
  }
  return bytes;
}

}  // namespace blitz
