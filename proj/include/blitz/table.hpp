#pragma once

#include <atomic>
#include <list>
#include <random>

#include "blitz/delayed.hpp"
#include "blitz/structure.hpp"

namespace blitz {

struct EngineConfig {
  CodecConfig codec;                       // lambda + tuples per block
  u64 training_trigger = u64{1} << 16;     // rows staged before models are learned
  u32 sample_size = u32{1} << 15;          // tuples sampled for structure learning
  bool correlation = false;
  u32 support_floor = 8;
  size_t cache_capacity = 0;               // fast-path LRU entries; 0 disables
  u64 seed = 0x00b1a7125eedULL;
};

// In-memory compressed row store. Rows are staged uncompressed until the
// training trigger, then structure learning runs on a sample, models are
// built from the staged rows, and everything is packed into independently
// decodable blocks. Later inserts are compressed immediately; the models are
// never rebuilt, escape paths absorb unseen values.
//
// Concurrency: single writer. Concurrent readers are safe only against a
// quiescent table with the cache disabled.
class CompressedTable {
 public:
  explicit CompressedTable(TableSchema schema, EngineConfig cfg = {})
      : schema_(std::move(schema)), cfg_(cfg) {
    cfg_.codec.validate();
    if (cfg_.training_trigger == 0) cfg_.training_trigger = 1;
  }

  CompressedTable(CompressedTable&& other) noexcept { *this = std::move(other); }
  CompressedTable& operator=(CompressedTable&& other) noexcept {
    schema_ = std::move(other.schema_);
    cfg_ = other.cfg_;
    trained_ = other.trained_;
    row_count_ = other.row_count_;
    compressed_rows_ = other.compressed_rows_;
    raw_bytes_ = other.raw_bytes_;
    staging_ = std::move(other.staging_);
    pending_ = std::move(other.pending_);
    structure_ = std::move(other.structure_);
    models_ = std::move(other.models_);
    blocks_ = std::move(other.blocks_);
    lru_ = std::move(other.lru_);
    cache_map_ = std::move(other.cache_map_);
    cache_hits_ = other.cache_hits_;
    cache_misses_ = other.cache_misses_;
    training_events_ = other.training_events_;
    blocks_decoded_.store(other.blocks_decoded_.load(std::memory_order_relaxed),
                          std::memory_order_relaxed);
    return *this;
  }

  const TableSchema& schema() const { return schema_; }
  const EngineConfig& config() const { return cfg_; }
  u64 row_count() const { return row_count_; }
  bool trained() const { return trained_; }
  const TableModels& models() const { return models_; }
  const LearnedStructure& structure() const { return structure_; }

  u64 insert(Tuple t) {
    schema_.validate(t);
    raw_bytes_ += raw_tuple_bytes(t);
    u64 row = row_count_++;
    if (!trained_) {
      staging_.push_back(std::move(t));
      if (staging_.size() >= cfg_.training_trigger) train_and_compress();
      return row;
    }
    pending_.push_back(std::move(t));
    u32 zeta = cfg_.codec.tuples_per_block;
    if (zeta != 0 && pending_.size() >= zeta) flush_pending();
    return row;
  }

  Tuple get(u64 row) {
    if (row >= row_count_) raise(Errc::NotFound, "row id out of range");
    if (!trained_) return staging_[row];
    if (row >= compressed_rows_) return pending_[row - compressed_rows_];
    if (cache_enabled()) {
      if (const Tuple* hit = cache_find(row)) {
        ++cache_hits_;
        return *hit;
      }
      ++cache_misses_;
    }
    Tuple t = load_row(row);
    if (cache_enabled()) cache_put(row, t, /*dirty=*/false);
    return t;
  }

  void update(u64 row, Tuple t) {
    if (row >= row_count_) raise(Errc::NotFound, "row id out of range");
    schema_.validate(t);
    if (!trained_) {
      raw_bytes_ += raw_tuple_bytes(t) - raw_tuple_bytes(staging_[row]);
      staging_[row] = std::move(t);
      return;
    }
    if (row >= compressed_rows_) {
      Tuple& slot = pending_[row - compressed_rows_];
      raw_bytes_ += raw_tuple_bytes(t) - raw_tuple_bytes(slot);
      slot = std::move(t);
      return;
    }
    if (cache_enabled()) {
      if (Tuple* hit = cache_find(row)) {
        ++cache_hits_;
        raw_bytes_ += raw_tuple_bytes(t) - raw_tuple_bytes(*hit);
        *hit = std::move(t);
        cache_mark_dirty(row);
        return;
      }
      ++cache_misses_;
      raw_bytes_ += raw_tuple_bytes(t) - raw_tuple_bytes(load_row(row));
      cache_put(row, t, /*dirty=*/true);
      return;
    }
    raw_bytes_ += raw_tuple_bytes(t);
    rewrite_row(row, std::move(t), /*adjust_raw=*/true);
  }

  // Forces training on whatever is staged and flushes any partial block and
  // dirty cache entries. After this every row lives in a compressed block.
  void flush() {
    if (!trained_ && !staging_.empty()) train_and_compress();
    if (!pending_.empty()) flush_pending();
    flush_cache();
  }

  void flush_cache() {
    for (auto it = lru_.rbegin(); it != lru_.rend(); ++it) {
      if (it->dirty) {
        rewrite_row(it->row, it->tuple, /*adjust_raw=*/false);
        it->dirty = false;
      }
    }
  }

  // Sequential visit of every row in id order; decodes each block once.
  template <class Fn>
  void scan(Fn&& fn) {
    flush_cache();
    u64 row = 0;
    for (const Block& b : blocks_) {
      TupleCodec codec(schema_, models_);
      DelayedDecoder dec(b.bytes, cfg_.codec.lambda);
      blocks_decoded_.fetch_add(1, std::memory_order_relaxed);
      for (u32 i = 0; i < b.rows; ++i) fn(row++, codec.decode_tuple(dec));
    }
    for (const Tuple& t : pending_) fn(row++, t);
    for (const Tuple& t : staging_) fn(row++, t);
  }

  struct Stats {
    u64 rows = 0;
    u64 payload_bytes = 0;  // compressed blocks
    u64 model_bytes = 0;    // serialized models
    u64 index_bytes = 0;    // block index
    u64 raw_bytes = 0;      // uncompressed row-store estimate
    double compression_factor = 0;
    u64 blocks_decoded = 0;
    u64 cache_hits = 0;
    u64 cache_misses = 0;
    u64 training_events = 0;
  };

  Stats stats() const {
    Stats s;
    s.rows = row_count_;
    for (const Block& b : blocks_) s.payload_bytes += b.bytes.size();
    if (trained_) {
      ByteWriter w;
      models_.save(w);
      s.model_bytes = w.size();
    }
    s.index_bytes = blocks_.size() * 16;
    s.raw_bytes = raw_bytes_;
    u64 denom = s.payload_bytes + s.model_bytes + s.index_bytes;
    s.compression_factor = denom ? static_cast<double>(s.raw_bytes) / denom : 0;
    s.blocks_decoded = blocks_decoded_.load(std::memory_order_relaxed);
    s.cache_hits = cache_hits_;
    s.cache_misses = cache_misses_;
    s.training_events = training_events_;
    return s;
  }

  u64 blocks_decoded() const { return blocks_decoded_.load(std::memory_order_relaxed); }
  u64 cache_hits() const { return cache_hits_; }
  u64 cache_misses() const { return cache_misses_; }
  size_t block_count() const { return blocks_.size(); }

  // Container-format plumbing.
  struct Block {
    u64 start_row;
    u32 rows;
    std::vector<u8> bytes;
  };
  const std::vector<Block>& blocks() const { return blocks_; }

  static CompressedTable restore(TableSchema schema, EngineConfig cfg, LearnedStructure structure,
                                 TableModels models, std::vector<Block> blocks, u64 raw_bytes) {
    CompressedTable t(std::move(schema), cfg);
    t.trained_ = true;
    t.structure_ = std::move(structure);
    t.models_ = std::move(models);
    t.blocks_ = std::move(blocks);
    t.raw_bytes_ = raw_bytes;
    for (const Block& b : t.blocks_) t.compressed_rows_ += b.rows;
    t.row_count_ = t.compressed_rows_;
    return t;
  }

 private:
  bool cache_enabled() const { return cfg_.cache_capacity > 0; }

  void train_and_compress() {
    std::vector<Tuple> sample;
    if (staging_.size() <= cfg_.sample_size) {
      sample = staging_;
    } else {
      std::mt19937_64 rng(cfg_.seed);
      std::vector<u64> idx(staging_.size());
      for (u64 i = 0; i < idx.size(); ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(cfg_.sample_size);
      sample.reserve(idx.size());
      for (u64 i : idx) sample.push_back(staging_[i]);
    }
    StructureConfig scfg{
        .correlation = cfg_.correlation,
        .support_floor = cfg_.support_floor,
        .string_reset_every = cfg_.codec.tuples_per_block,
        .total_rows = staging_.size(),
    };
    structure_ = learn_structure(schema_, sample, scfg);
    models_ = build_models(schema_, staging_, structure_, scfg);
    trained_ = true;
    ++training_events_;

    u32 zeta = cfg_.codec.tuples_per_block;
    u64 start = 0;
    while (start < staging_.size()) {
      u64 count = zeta == 0 ? staging_.size() - start
                            : std::min<u64>(zeta, staging_.size() - start);
      append_block(std::span<const Tuple>(staging_.data() + start, count));
      start += count;
    }
    staging_.clear();
    staging_.shrink_to_fit();
  }

  void flush_pending() {
    append_block(pending_);
    pending_.clear();
  }

  void append_block(std::span<const Tuple> tuples) {
    Block b;
    b.start_row = compressed_rows_;
    b.rows = static_cast<u32>(tuples.size());
    TupleCodec codec(schema_, models_);
    DelayedEncoder enc(cfg_.codec.lambda);
    for (const Tuple& t : tuples) codec.encode_tuple(enc, t);
    enc.flush(b.bytes);
    compressed_rows_ += b.rows;
    blocks_.push_back(std::move(b));
  }

  const Block& block_of(u64 row) const {
    auto it = std::upper_bound(blocks_.begin(), blocks_.end(), row,
                               [](u64 r, const Block& b) { return r < b.start_row; });
    assert(it != blocks_.begin());
    return *std::prev(it);
  }

  // Decodes one block up to and including the wanted position.
  Tuple load_row(u64 row) {
    const Block& b = block_of(row);
    blocks_decoded_.fetch_add(1, std::memory_order_relaxed);
    TupleCodec codec(schema_, models_);
    DelayedDecoder dec(b.bytes, cfg_.codec.lambda);
    u64 pos = row - b.start_row;
    Tuple t;
    for (u64 i = 0; i <= pos; ++i) t = codec.decode_tuple(dec);
    return t;
  }

  void rewrite_row(u64 row, Tuple t, bool adjust_raw) {
    Block& b = const_cast<Block&>(block_of(row));
    blocks_decoded_.fetch_add(1, std::memory_order_relaxed);
    TupleCodec codec(schema_, models_);
    DelayedDecoder dec(b.bytes, cfg_.codec.lambda);
    std::vector<Tuple> tuples(b.rows);
    for (u32 i = 0; i < b.rows; ++i) tuples[i] = codec.decode_tuple(dec);
    u64 pos = row - b.start_row;
    if (adjust_raw) raw_bytes_ -= raw_tuple_bytes(tuples[pos]);
    tuples[pos] = std::move(t);
    b.bytes.clear();
    codec.reset();
    DelayedEncoder enc(cfg_.codec.lambda);
    for (const Tuple& x : tuples) codec.encode_tuple(enc, x);
    enc.flush(b.bytes);
  }

  // --- fast-path LRU cache (write-back) ---------------------------------

  struct CacheEntry {
    u64 row;
    Tuple tuple;
    bool dirty;
  };

  Tuple* cache_find(u64 row) {
    auto it = cache_map_.find(row);
    if (it == cache_map_.end()) return nullptr;
    lru_.splice(lru_.begin(), lru_, it->second);
    return &it->second->tuple;
  }

  void cache_mark_dirty(u64 row) {
    auto it = cache_map_.find(row);
    if (it != cache_map_.end()) it->second->dirty = true;
  }

  void cache_put(u64 row, Tuple t, bool dirty) {
    lru_.push_front(CacheEntry{row, std::move(t), dirty});
    cache_map_[row] = lru_.begin();
    while (lru_.size() > cfg_.cache_capacity) {
      CacheEntry& victim = lru_.back();
      if (victim.dirty) rewrite_row(victim.row, std::move(victim.tuple), /*adjust_raw=*/false);
      cache_map_.erase(victim.row);
      lru_.pop_back();
    }
  }

  TableSchema schema_;
  EngineConfig cfg_;
  bool trained_ = false;
  u64 row_count_ = 0;
  u64 compressed_rows_ = 0;
  u64 raw_bytes_ = 0;
  std::vector<Tuple> staging_;
  std::vector<Tuple> pending_;
  LearnedStructure structure_;
  TableModels models_;
  std::vector<Block> blocks_;

  std::list<CacheEntry> lru_;
  std::unordered_map<u64, std::list<CacheEntry>::iterator> cache_map_;
  u64 cache_hits_ = 0;
  u64 cache_misses_ = 0;
  u64 training_events_ = 0;
  std::atomic<u64> blocks_decoded_{0};
};

}  // namespace blitz
