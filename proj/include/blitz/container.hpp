#pragma once

#include <fstream>

#include "blitz/table.hpp"

namespace blitz {

// BLZ1 container: magic, format version, schema, codec configuration,
// learned structure and models, block index, block payload. All integers
// little-endian; the 16-bit code units inside blocks stay big-endian.
// A file saved from an untrained-but-flushed table or with `models_only`
// simply carries zero blocks.
namespace blz1 {

inline constexpr char kMagic[4] = {'B', 'L', 'Z', '1'};
inline constexpr u16 kVersion = 1;

inline void save(const CompressedTable& table, ByteWriter& w, bool models_only = false) {
  if (!table.trained()) raise(Errc::SchemaError, "flush the table before saving");
  w.put_bytes(kMagic, 4);
  w.put<u16>(kVersion);
  table.schema().save(w);
  const EngineConfig& cfg = table.config();
  w.put<u64>(cfg.codec.lambda);
  w.put<u32>(cfg.codec.tuples_per_block);
  w.put<u64>(cfg.training_trigger);
  w.put<u32>(cfg.sample_size);
  w.put<u8>(cfg.correlation ? 1 : 0);
  w.put<u32>(cfg.support_floor);
  table.structure().save(w);
  table.models().save(w);
  w.put<u64>(models_only ? 0 : table.stats().raw_bytes);

  const auto& blocks = table.blocks();
  w.put<u64>(models_only ? 0 : blocks.size());
  if (!models_only) {
    u64 offset = 0;
    for (const auto& b : blocks) {
      w.put<u64>(b.start_row);
      w.put<u32>(b.rows);
      w.put<u64>(offset);
      w.put<u64>(b.bytes.size());
      offset += b.bytes.size();
    }
    for (const auto& b : blocks) w.put_bytes(b.bytes.data(), b.bytes.size());
  }
}

inline CompressedTable load(ByteReader& r) {
  char magic[4];
  std::memcpy(magic, r.get_span(4).data(), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) raise(Errc::CorruptStream, "not a BLZ1 file");
  if (r.get<u16>() != kVersion) raise(Errc::CorruptStream, "unsupported format version");
  TableSchema schema = TableSchema::load(r);
  EngineConfig cfg;
  cfg.codec.lambda = r.get<u64>();
  cfg.codec.tuples_per_block = r.get<u32>();
  cfg.training_trigger = r.get<u64>();
  cfg.sample_size = r.get<u32>();
  cfg.correlation = r.get<u8>() != 0;
  cfg.support_floor = r.get<u32>();
  cfg.codec.validate();
  LearnedStructure structure = LearnedStructure::load(r);
  TableModels models = TableModels::load(r);
  if (models.ordering.size() != schema.column_count())
    raise(Errc::CorruptStream, "model set does not match schema");
  u64 raw_bytes = r.get<u64>();

  u64 nblocks = r.get<u64>();
  struct IndexEntry {
    u64 start_row;
    u32 rows;
    u64 offset;
    u64 size;
  };
  std::vector<IndexEntry> index(nblocks);
  for (auto& e : index) {
    e.start_row = r.get<u64>();
    e.rows = r.get<u32>();
    e.offset = r.get<u64>();
    e.size = r.get<u64>();
  }
  std::vector<CompressedTable::Block> blocks;
  blocks.reserve(nblocks);
  size_t payload_base = r.pos();
  for (const auto& e : index) {
    r.seek(payload_base + e.offset);
    auto span = r.get_span(e.size);
    CompressedTable::Block b;
    b.start_row = e.start_row;
    b.rows = e.rows;
    b.bytes.assign(span.begin(), span.end());
    blocks.push_back(std::move(b));
  }
  return CompressedTable::restore(std::move(schema), cfg, std::move(structure), std::move(models),
                                  std::move(blocks), raw_bytes);
}

inline void save_file(const CompressedTable& table, const std::string& path,
                      bool models_only = false) {
  ByteWriter w;
  save(table, w, models_only);
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::NotFound, "cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.size()));
  if (!out) raise(Errc::CorruptStream, "short write: " + path);
}

inline CompressedTable load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::NotFound, "cannot open: " + path);
  std::vector<u8> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(data);
  return load(r);
}

}  // namespace blz1
}  // namespace blitz
