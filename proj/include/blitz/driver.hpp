#pragma once

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "blitz/bench.hpp"

namespace blitz {

// Shared implementation of the CLI commands, also driven directly by tests.
namespace driver {

struct Options {
  std::string schema_path;  // optional JSON kind overrides
  bool archive = false;     // archive mode: large mark threshold, one block
  u32 zeta = 0;             // 0 = mode default
  u64 lambda = 0;           // 0 = mode default
  bool correlation = false;
  u64 training_trigger = u64{1} << 16;
  u32 sample_size = u32{1} << 15;
  size_t cache = 0;
  u64 seed = 0x00b1a7125eedULL;
};

inline EngineConfig engine_config(const Options& opt) {
  EngineConfig cfg;
  cfg.codec.lambda = opt.lambda ? opt.lambda : (opt.archive ? u64{1} << 24 : u64{1} << 16);
  cfg.codec.tuples_per_block = opt.zeta ? opt.zeta : (opt.archive ? 0 : 1);
  if (opt.archive && opt.zeta == 0) cfg.codec.tuples_per_block = 0;  // whole-table block
  cfg.correlation = opt.correlation;
  cfg.training_trigger = opt.training_trigger;
  cfg.sample_size = opt.sample_size;
  cfg.cache_capacity = opt.cache;
  cfg.seed = opt.seed;
  return cfg;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::NotFound, "cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ColumnKind kind_from_name(const std::string& s) {
  if (s == "categorical") return ColumnKind::Categorical;
  if (s == "integer") return ColumnKind::Integer;
  if (s == "floating") return ColumnKind::Floating;
  if (s == "string") return ColumnKind::String;
  raise(Errc::SchemaError, "unknown column kind: " + s);
}

// Inferred schema with per-column JSON overrides:
//   {"columns": [{"name": "price", "kind": "floating", "precision": 1e-2}]}
inline TableSchema resolve_schema(const CsvTable& csv, const std::string& schema_path) {
  TableSchema inferred = infer_schema(csv);
  if (schema_path.empty()) return inferred;
  auto doc = nlohmann::json::parse(read_file(schema_path));
  std::vector<ColumnSpec> cols = inferred.columns();
  const auto& list = doc.contains("columns") ? doc["columns"] : doc;
  for (const auto& entry : list) {
    std::string name = entry.at("name").get<std::string>();
    auto it = std::find_if(cols.begin(), cols.end(),
                           [&](const ColumnSpec& c) { return c.name == name; });
    if (it == cols.end()) raise(Errc::SchemaError, "schema override for unknown column: " + name);
    if (entry.contains("kind")) it->kind = kind_from_name(entry["kind"].get<std::string>());
    if (entry.contains("precision")) it->precision = entry["precision"].get<double>();
  }
  return TableSchema(std::move(cols));
}

inline void check_header(const CompressedTable& table, const CsvTable& csv) {
  if (csv.header.size() != table.schema().column_count())
    raise(Errc::SchemaError, "csv column count does not match the model file");
  for (size_t i = 0; i < csv.header.size(); ++i) {
    if (csv.header[i] != table.schema().column(i).name)
      raise(Errc::SchemaError, "csv column '" + csv.header[i] + "' does not match model column '" +
                                   table.schema().column(i).name + "'");
  }
}

inline void train(const std::string& csv_path, const std::string& model_path,
                  const Options& opt) {
  CsvTable csv = read_csv(read_file(csv_path));
  TableSchema schema = resolve_schema(csv, opt.schema_path);
  CompressedTable table(schema, engine_config(opt));
  for (const auto& row : csv.rows) table.insert(row_to_tuple(schema, row));
  table.flush();
  blz1::save_file(table, model_path, /*models_only=*/true);
}

inline void compress(const std::string& csv_path, const std::string& model_path,
                     const std::string& out_path) {
  CompressedTable table = blz1::load_file(model_path);
  if (table.row_count() != 0) raise(Errc::SchemaError, "model file already carries rows");
  CsvTable csv = read_csv(read_file(csv_path));
  check_header(table, csv);
  for (const auto& row : csv.rows) table.insert(row_to_tuple(table.schema(), row));
  table.flush();
  blz1::save_file(table, out_path);
}

inline void decompress(const std::string& blz_path, const std::string& csv_path) {
  CompressedTable table = blz1::load_file(blz_path);
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) raise(Errc::NotFound, "cannot open for writing: " + csv_path);
  std::vector<std::string> header;
  for (const ColumnSpec& c : table.schema().columns()) header.push_back(c.name);
  write_csv_record(out, header);
  table.scan([&](u64, const Tuple& t) { write_csv_record(out, tuple_to_row(table.schema(), t)); });
  if (!out) raise(Errc::CorruptStream, "short write: " + csv_path);
}

}  // namespace driver
}  // namespace blitz
