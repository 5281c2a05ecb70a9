#pragma once

#include <cmath>
#include <span>
#include <unordered_map>

#include "blitz/column_codec.hpp"

namespace blitz {

struct StructureConfig {
  bool correlation = false;
  u32 max_combo_product = u32{1} << 16;  // parent cardinality x child cardinality cap
  u32 support_floor = 8;                 // min rows before a parent value gets its own model
  u32 string_reset_every = 1;            // block cadence mirrored while fitting string models
  u64 total_rows = 0;                    // full-table size the sample stands for; 0 = sample size
};

struct LearnedStructure {
  std::vector<u32> ordering;  // column encode order
  std::vector<i32> parent;    // per schema column, -1 for none

  void save(ByteWriter& w) const {
    w.put<u32>(static_cast<u32>(ordering.size()));
    for (u32 c : ordering) w.put<u32>(c);
    for (i32 p : parent) w.put<i32>(p);
  }

  static LearnedStructure load(ByteReader& r) {
    LearnedStructure s;
    u32 n = r.get<u32>();
    for (u32 i = 0; i < n; ++i) s.ordering.push_back(r.get<u32>());
    for (u32 i = 0; i < n; ++i) s.parent.push_back(r.get<i32>());
    return s;
  }
};

namespace detail {

inline double entropy_bits(std::span<const u64> counts, u64 total) {
  if (total == 0) return 0;
  double h = 0;
  for (u64 c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

// Dictionary-encoded view of one sampled column, used for entropy estimates.
struct ColumnKeys {
  std::vector<u32> keys;
  u32 cardinality = 0;
  std::vector<u64> counts;
};

inline ColumnKeys key_encode(const TableSchema& schema, std::span<const Tuple> rows, u32 col) {
  ColumnKeys out;
  out.keys.reserve(rows.size());
  const ColumnKind kind = schema.column(col).kind;
  auto intern = [&](auto& map, const auto& v) {
    auto [it, inserted] = map.try_emplace(v, out.cardinality);
    if (inserted) {
      ++out.cardinality;
      out.counts.push_back(0);
    }
    ++out.counts[it->second];
    out.keys.push_back(it->second);
  };
  if (kind == ColumnKind::Categorical || kind == ColumnKind::String) {
    std::unordered_map<std::string, u32> map;
    for (const Tuple& t : rows) intern(map, std::get<std::string>(t[col]));
  } else if (kind == ColumnKind::Integer) {
    std::unordered_map<i64, u32> map;
    for (const Tuple& t : rows) intern(map, std::get<i64>(t[col]));
  } else {
    double lo = 0, hi = 0;
    bool any = false;
    for (const Tuple& t : rows) {
      double v = std::get<double>(t[col]);
      if (!std::isfinite(v)) continue;
      if (!any) lo = hi = v, any = true;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double w = hi > lo ? (hi - lo) / 512.0 : 1.0;
    std::unordered_map<i64, u32> map;
    for (const Tuple& t : rows) {
      double v = std::get<double>(t[col]);
      i64 bucket = std::isfinite(v) ? static_cast<i64>((v - lo) / w) : -1;
      intern(map, bucket);
    }
  }
  return out;
}

}  // namespace detail

// Greedy ordering: repeatedly pick the cheapest remaining column, allowing a
// single already-selected categorical parent when the conditional entropy
// plus a model-size penalty beats the marginal entropy. With correlation off
// the input order is kept and no parents are learned.
inline LearnedStructure learn_structure(const TableSchema& schema, std::span<const Tuple> rows,
                                        const StructureConfig& cfg) {
  const u32 ncols = static_cast<u32>(schema.column_count());
  LearnedStructure s;
  s.parent.assign(ncols, -1);
  if (!cfg.correlation || rows.empty()) {
    for (u32 c = 0; c < ncols; ++c) s.ordering.push_back(c);
    return s;
  }

  const u64 n = rows.size();
  std::vector<detail::ColumnKeys> keys(ncols);
  std::vector<double> self_bits(ncols);
  for (u32 c = 0; c < ncols; ++c) {
    keys[c] = detail::key_encode(schema, rows, c);
    self_bits[c] = detail::entropy_bits(keys[c].counts, n);
    if (schema.column(c).kind == ColumnKind::String) {
      // Strings only need a position in the ordering; estimate their raw cost.
      std::vector<u64> bytes(256, 0);
      u64 total = 0;
      for (const Tuple& t : rows) {
        for (char ch : std::get<std::string>(t[c])) ++bytes[static_cast<u8>(ch)], ++total;
      }
      self_bits[c] = detail::entropy_bits(bytes, total) * (static_cast<double>(total) / n);
    }
  }

  // Conditional entropy plus a serialized-model-size penalty, both from one
  // joint count table. The penalty charges every well-supported parent value
  // a header plus its own conditional vocabulary, amortized over the rows the
  // sample stands for.
  const double rows_stood_for =
      static_cast<double>(std::max<u64>(cfg.total_rows, n));
  auto cost_bits = [&](u32 child, u32 par) {
    const auto& ck = keys[child];
    const auto& pk = keys[par];
    std::vector<u64> joint(static_cast<size_t>(ck.cardinality) * pk.cardinality, 0);
    for (u64 i = 0; i < n; ++i)
      ++joint[static_cast<size_t>(pk.keys[i]) * ck.cardinality + ck.keys[i]];
    double model_bytes = 0;
    for (u32 q = 0; q < pk.cardinality; ++q) {
      if (pk.counts[q] < cfg.support_floor) continue;
      u32 distinct = 0;
      for (u32 x = 0; x < ck.cardinality; ++x)
        distinct += joint[static_cast<size_t>(q) * ck.cardinality + x] > 0;
      model_bytes += 24.0 + 8.0 * distinct;
    }
    return detail::entropy_bits(joint, n) - detail::entropy_bits(pk.counts, n) +
           model_bytes * 8.0 / rows_stood_for;
  };

  std::vector<bool> placed(ncols, false);
  std::vector<u32> selected_parents;  // categorical columns already in the ordering
  for (u32 step = 0; step < ncols; ++step) {
    double best_cost = 0;
    u32 best_col = ncols;
    i32 best_parent = -1;
    for (u32 x = 0; x < ncols; ++x) {
      if (placed[x]) continue;
      double cost = self_bits[x];
      i32 par = -1;
      if (schema.column(x).kind != ColumnKind::String) {
        for (u32 q : selected_parents) {
          u64 product = static_cast<u64>(keys[q].cardinality) * keys[x].cardinality;
          if (product > cfg.max_combo_product) continue;
          double c = cost_bits(x, q);
          if (c < cost) {
            cost = c;
            par = static_cast<i32>(q);
          }
        }
      }
      if (best_col == ncols || cost < best_cost) {
        best_cost = cost;
        best_col = x;
        best_parent = par;
      }
    }
    placed[best_col] = true;
    s.ordering.push_back(best_col);
    s.parent[best_col] = best_parent;
    if (schema.column(best_col).kind == ColumnKind::Categorical) selected_parents.push_back(best_col);
  }
  return s;
}

namespace detail {

inline ColumnModel fit_column_model(const TableSchema& schema, u32 col,
                                    std::span<const Tuple> rows,
                                    std::span<const u32> subset,  // row indices; empty = all
                                    const StructureConfig& cfg) {
  auto row_at = [&](size_t i) -> const Tuple& {
    return subset.empty() ? rows[i] : rows[subset[i]];
  };
  size_t n = subset.empty() ? rows.size() : subset.size();
  switch (schema.column(col).kind) {
    case ColumnKind::Categorical: {
      return ColumnModel(CategoricalColumnModel::fit(
          n, [&](size_t i) -> const std::string& { return std::get<std::string>(row_at(i)[col]); },
          /*with_escape=*/true));
    }
    case ColumnKind::Integer: {
      std::vector<i64> v(n);
      for (size_t i = 0; i < n; ++i) v[i] = std::get<i64>(row_at(i)[col]);
      return ColumnModel(NumericModel::fit_integers(v));
    }
    case ColumnKind::Floating: {
      std::vector<double> v(n);
      for (size_t i = 0; i < n; ++i) v[i] = std::get<double>(row_at(i)[col]);
      return ColumnModel(NumericModel::fit_doubles(v, schema.column(col).precision));
    }
    case ColumnKind::String: {
      std::vector<std::string> v(n);
      for (size_t i = 0; i < n; ++i) v[i] = std::get<std::string>(row_at(i)[col]);
      return ColumnModel(StringModel::fit(v, {.reset_every = cfg.string_reset_every}));
    }
  }
  raise(Errc::SchemaError, "unknown column kind");
}

}  // namespace detail

// Full-table scan building one marginal model per column plus conditional
// models for every well-supported parent value.
inline TableModels build_models(const TableSchema& schema, std::span<const Tuple> rows,
                                const LearnedStructure& s, const StructureConfig& cfg) {
  const u32 ncols = static_cast<u32>(schema.column_count());
  TableModels models;
  models.ordering = s.ordering;
  models.coders.resize(ncols);
  for (u32 c = 0; c < ncols; ++c) {
    models.coders[c].parent = s.parent[c];
    models.coders[c].marginal = detail::fit_column_model(schema, c, rows, {}, cfg);
  }
  for (u32 c = 0; c < ncols; ++c) {
    i32 p = s.parent[c];
    if (p < 0) continue;
    const CategoricalColumnModel& pm = models.coders[p].marginal.categorical();
    std::map<u32, std::vector<u32>> groups;
    for (u32 i = 0; i < rows.size(); ++i) {
      auto slot = pm.slot_of(std::get<std::string>(rows[i][p]));
      if (slot) groups[*slot].push_back(i);
    }
    for (const auto& [slot, indices] : groups) {
      if (indices.size() < cfg.support_floor) continue;
      models.coders[c].conditional.emplace(
          slot, detail::fit_column_model(schema, c, rows, indices, cfg));
    }
  }
  return models;
}

}  // namespace blitz
