#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

#include "blitz/arithmetic.hpp"
#include "blitz/container.hpp"
#include "blitz/csv.hpp"

namespace blitz {

// Zipf-distributed key generator with hashed spreading, so the hot set is
// not a contiguous id range.
class ZipfGenerator {
 public:
  ZipfGenerator(u64 n, double theta, u64 seed, bool scramble = true)
      : n_(n), theta_(theta), rng_(seed), scramble_(scramble) {
    zeta_n_ = zeta(n, theta);
    zeta2_ = zeta(2, theta);
    alpha_ = 1.0 / (1.0 - theta);
    eta_ = (1.0 - std::pow(2.0 / static_cast<double>(n), 1.0 - theta)) / (1.0 - zeta2_ / zeta_n_);
  }

  u64 next() {
    double u = uniform_(rng_);
    double uz = u * zeta_n_;
    u64 rank;
    if (uz < 1.0) {
      rank = 0;
    } else if (uz < 1.0 + std::pow(0.5, theta_)) {
      rank = 1;
    } else {
      rank = static_cast<u64>(static_cast<double>(n_) *
                              std::pow(eta_ * u - eta_ + 1.0, alpha_));
      if (rank >= n_) rank = n_ - 1;
    }
    return scramble_ ? hash_to_range(rank) : rank;
  }

 private:
  static double zeta(u64 n, double theta) {
    double z = 0;
    for (u64 i = 1; i <= n; ++i) z += 1.0 / std::pow(static_cast<double>(i), theta);
    return z;
  }

  u64 hash_to_range(u64 x) const {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x % n_;
  }

  u64 n_;
  double theta_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  bool scramble_;
  double zeta_n_, zeta2_, alpha_, eta_;
};

struct BenchReport {
  std::string name;
  double compression_factor = 0;
  double bits_per_tuple = 0;
  double entropy_estimate = 0;
  double insert_p50_ns = 0, insert_p95_ns = 0, insert_p99_ns = 0;
  double access_p50_ns = 0, access_p95_ns = 0, access_p99_ns = 0;
  double throughput_mb_s = 0;
  double ops_per_s = 0;
  double training_ms = 0;
  u64 model_bytes = 0;
  u64 payload_bytes = 0;
  u64 raw_bytes = 0;
  u64 rows = 0;
  u64 ops = 0;
  u64 cache_hits = 0;
  u64 cache_misses = 0;

  void print_kv(std::ostream& os) const {
    os << "name=" << name << '\n'
       << "rows=" << rows << '\n'
       << "ops=" << ops << '\n'
       << "compression_factor=" << compression_factor << '\n'
       << "bits_per_tuple=" << bits_per_tuple << '\n'
       << "entropy_estimate=" << entropy_estimate << '\n'
       << "insert_p50_ns=" << insert_p50_ns << '\n'
       << "insert_p95_ns=" << insert_p95_ns << '\n'
       << "insert_p99_ns=" << insert_p99_ns << '\n'
       << "access_p50_ns=" << access_p50_ns << '\n'
       << "access_p95_ns=" << access_p95_ns << '\n'
       << "access_p99_ns=" << access_p99_ns << '\n'
       << "throughput_mb_s=" << throughput_mb_s << '\n'
       << "ops_per_s=" << ops_per_s << '\n'
       << "training_ms=" << training_ms << '\n'
       << "model_bytes=" << model_bytes << '\n'
       << "payload_bytes=" << payload_bytes << '\n'
       << "raw_bytes=" << raw_bytes << '\n'
       << "cache_hits=" << cache_hits << '\n'
       << "cache_misses=" << cache_misses << '\n';
  }
};

// Quantized-model entropy in bits.
inline double model_entropy_bits(const CategoricalModel& m) {
  double h = 0;
  for (u32 w : m.widths()) {
    if (w == 0) continue;
    double p = static_cast<double>(w) / kProbScale;
    h -= p * std::log2(p);
  }
  return h;
}

inline double model_entropy_bits(const NumericModel& m) {
  return model_entropy_bits(m.bucket_model()) + m.segment_bits();
}

inline double model_entropy_bits(const StringModel& m) {
  return model_entropy_bits(m.prefix_index_model()) + model_entropy_bits(m.match_len_model()) +
         model_entropy_bits(m.word_count_model()) + model_entropy_bits(m.delimiter_model()) +
         model_entropy_bits(m.dictionary_model());
}

// Rough per-tuple cost of the marginal models; a reporting aid, not a bound.
inline double tuple_entropy_estimate_bits(const TableModels& models) {
  double h = 0;
  for (const ColumnCoder& c : models.coders) {
    if (c.marginal.is_categorical()) {
      h += model_entropy_bits(c.marginal.categorical().distribution());
    } else if (c.marginal.is_numeric()) {
      h += model_entropy_bits(c.marginal.numeric());
    } else {
      h += model_entropy_bits(c.marginal.string());
    }
  }
  return h;
}

namespace bench {

using Clock = std::chrono::steady_clock;

inline double ns_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
}

inline double percentile(std::vector<double>& samples, double q) {
  if (samples.empty()) return 0;
  size_t k = static_cast<size_t>(q * static_cast<double>(samples.size() - 1));
  std::nth_element(samples.begin(), samples.begin() + k, samples.end());
  return samples[k];
}

// Mixed-kind synthetic table shared by the YCSB driver and the test suites.
inline TableSchema mixed_schema() {
  return TableSchema({{"city", ColumnKind::Categorical, 0},
                      {"quantity", ColumnKind::Integer, 0},
                      {"price", ColumnKind::Floating, 1e-6},
                      {"note", ColumnKind::String, 0}});
}

class MixedRowGenerator {
 public:
  explicit MixedRowGenerator(u64 seed) : rng_(seed) {}

  Tuple next() {
    static const char* kCities[] = {"amsterdam", "beijing", "boston",  "cairo",
                                    "dresden",   "kyoto",   "nairobi", "oslo"};
    static const char* kWords[] = {"alpha", "bravo", "charlie", "delta", "echo",
                                   "fox",   "golf",  "hotel",   "india", "juliet"};
    std::string city = kCities[pick(12) % 8];  // mildly skewed
    i64 quantity = static_cast<i64>(pick(1000));
    double price = static_cast<double>(pick(1000000)) / 1000.0;
    std::string note = "https://example.org/";
    u32 words = 1 + pick(4);
    for (u32 w = 0; w < words; ++w) {
      note += kWords[pick(10)];
      note += w + 1 == words ? "" : "/";
    }
    return Tuple{std::move(city), quantity, price, std::move(note)};
  }

 private:
  u32 pick(u32 n) { return static_cast<u32>(rng_() % n); }
  std::mt19937_64 rng_;
};

struct YcsbOptions {
  u64 rows = 100000;
  u64 ops = 100000;
  bool zipf = true;
  double theta = 0.99;
  char workload = 'c';  // 'c' point reads, 'f' read-modify-write
  size_t cache = 0;     // entries
  u32 zeta = 1;
  u64 lambda = u64{1} << 16;
  bool correlation = false;
  u64 seed = 42;
  u32 threads = 1;  // read-only clients for workload c
  bool verify = true;
};

// Loads a synthetic mixed table, verifies it against an uncompressed shadow
// copy, then runs point reads or read-modify-writes over it.
inline BenchReport run_ycsb(const YcsbOptions& opt) {
  BenchReport rep;
  rep.name = std::string("ycsb-") + opt.workload;
  rep.rows = opt.rows;
  rep.ops = opt.ops;
  if (opt.rows == 0) return rep;
  if (opt.threads > 1 && (opt.cache > 0 || opt.workload != 'c'))
    raise(Errc::SchemaError, "multi-threaded runs require workload c with the cache disabled");

  EngineConfig cfg;
  cfg.codec.lambda = opt.lambda;
  cfg.codec.tuples_per_block = opt.zeta;
  cfg.correlation = opt.correlation;
  cfg.cache_capacity = opt.cache;
  cfg.seed = opt.seed;
  if (opt.rows < cfg.training_trigger) cfg.training_trigger = opt.rows;

  CompressedTable table(mixed_schema(), cfg);
  MixedRowGenerator gen(opt.seed);
  std::vector<Tuple> shadow;
  if (opt.verify) shadow.reserve(opt.rows);

  std::vector<double> insert_ns;
  insert_ns.reserve(opt.rows);
  auto t_load0 = Clock::now();
  for (u64 i = 0; i < opt.rows; ++i) {
    Tuple t = gen.next();
    if (opt.verify) shadow.push_back(t);
    auto t0 = Clock::now();
    table.insert(std::move(t));
    insert_ns.push_back(ns_since(t0));
  }
  table.flush();
  rep.training_ms = ns_since(t_load0) / 1e6;

  if (opt.verify) {
    for (u64 i = 0; i < opt.rows; ++i) {
      if (!tuple_matches(table.schema(), table.get(i), shadow[i]))
        raise(Errc::CorruptStream, "round-trip mismatch in bench");
    }
  }

  u64 warmup = opt.ops / 10;
  ZipfGenerator zipf(opt.rows, opt.theta, opt.seed + 1);
  std::mt19937_64 uni(opt.seed + 1);
  auto next_key = [&]() { return opt.zipf ? zipf.next() : uni() % opt.rows; };

  auto run_op = [&](u64 key, u64& bytes) {
    if (opt.workload == 'f') {
      Tuple t = table.get(key);
      t[1] = std::get<i64>(t[1]) + 1;
      bytes += raw_tuple_bytes(t);
      table.update(key, std::move(t));
    } else {
      bytes += raw_tuple_bytes(table.get(key));
    }
  };

  u64 sink_bytes = 0;
  for (u64 i = 0; i < warmup; ++i) run_op(next_key(), sink_bytes);

  u64 hits0 = table.cache_hits();
  u64 miss0 = table.cache_misses();
  u64 bytes_touched = 0;
  double run_s = 0;
  std::vector<double> access_ns;

  if (opt.threads <= 1) {
    access_ns.reserve(opt.ops);
    auto t_run0 = Clock::now();
    for (u64 i = 0; i < opt.ops; ++i) {
      u64 key = next_key();
      auto t0 = Clock::now();
      run_op(key, bytes_touched);
      access_ns.push_back(ns_since(t0));
    }
    run_s = ns_since(t_run0) / 1e9;
  } else {
    std::vector<std::thread> workers;
    std::vector<u64> bytes_by_thread(opt.threads, 0);
    u64 per_thread = opt.ops / opt.threads;
    auto t_run0 = Clock::now();
    for (u32 w = 0; w < opt.threads; ++w) {
      workers.emplace_back([&, w] {
        ZipfGenerator z(opt.rows, opt.theta, opt.seed + 10 + w);
        std::mt19937_64 u(opt.seed + 10 + w);
        u64 local = 0;
        for (u64 i = 0; i < per_thread; ++i) {
          u64 key = opt.zipf ? z.next() : u() % opt.rows;
          local += raw_tuple_bytes(table.get(key));
        }
        bytes_by_thread[w] = local;
      });
    }
    for (auto& t : workers) t.join();
    run_s = ns_since(t_run0) / 1e9;
    for (u64 b : bytes_by_thread) bytes_touched += b;
    rep.ops = per_thread * opt.threads;
  }

  auto st = table.stats();
  rep.compression_factor = st.compression_factor;
  rep.bits_per_tuple = st.payload_bytes * 8.0 / static_cast<double>(opt.rows);
  rep.entropy_estimate = tuple_entropy_estimate_bits(table.models());
  rep.model_bytes = st.model_bytes;
  rep.payload_bytes = st.payload_bytes;
  rep.raw_bytes = st.raw_bytes;
  rep.cache_hits = st.cache_hits - hits0;
  rep.cache_misses = st.cache_misses - miss0;
  rep.insert_p50_ns = percentile(insert_ns, 0.50);
  rep.insert_p95_ns = percentile(insert_ns, 0.95);
  rep.insert_p99_ns = percentile(insert_ns, 0.99);
  rep.access_p50_ns = percentile(access_ns, 0.50);
  rep.access_p95_ns = percentile(access_ns, 0.95);
  rep.access_p99_ns = percentile(access_ns, 0.99);
  rep.throughput_mb_s = run_s > 0 ? static_cast<double>(bytes_touched) / 1e6 / run_s : 0;
  rep.ops_per_s = run_s > 0 ? static_cast<double>(rep.ops) / run_s : 0;
  return rep;
}

struct EntropyOptions {
  u32 cols = 16;
  u64 total_bytes = u64{64} << 20;
  u64 seed = 7;
  u32 zeta = 1;
  u64 lambda = u64{1} << 16;
};

struct EntropyResult {
  u64 rows = 0;
  u64 values = 0;
  u64 raw_bytes = 0;
  u64 payload_bytes = 0;
  double bits_per_value = 0;
  double encode_mb_s = 0;
  double decode_mb_s = 0;
};

// Uniform cardinality-255 synthetic table; measures end-to-end coding
// throughput of either codec over per-block streams.
inline EntropyResult run_entropy(const EntropyOptions& opt, bool arithmetic) {
  EntropyResult res;
  u64 rows = opt.total_bytes / opt.cols;
  res.rows = rows;
  res.values = rows * opt.cols;
  res.raw_bytes = res.values;

  std::mt19937_64 rng(opt.seed);
  std::vector<u8> data(res.values);
  for (u8& v : data) v = static_cast<u8>(rng() % 255);

  std::vector<u64> counts(255);
  for (u8 v : data) ++counts[v];
  CategoricalModel model = CategoricalModel::fit(counts);

  u32 zeta = opt.zeta == 0 ? 1 : opt.zeta;
  u64 nblocks = (rows + zeta - 1) / zeta;
  std::vector<u8> payload;
  std::vector<u64> offsets{0};
  offsets.reserve(nblocks + 1);

  auto t0 = Clock::now();
  if (arithmetic) {
    for (u64 b = 0; b < nblocks; ++b) {
      ArithmeticEncoder enc;
      u64 lo = b * zeta, hi = std::min(rows, lo + zeta);
      for (u64 r = lo; r < hi; ++r)
        for (u32 c = 0; c < opt.cols; ++c) enc.put_set(model, data[r * opt.cols + c]);
      enc.finish(payload);
      offsets.push_back(payload.size());
    }
  } else {
    DelayedEncoder enc(opt.lambda);
    for (u64 b = 0; b < nblocks; ++b) {
      u64 lo = b * zeta, hi = std::min(rows, lo + zeta);
      for (u64 r = lo; r < hi; ++r)
        for (u32 c = 0; c < opt.cols; ++c) enc.put_set(model, data[r * opt.cols + c]);
      enc.flush(payload);
      offsets.push_back(payload.size());
    }
  }
  double enc_s = ns_since(t0) / 1e9;

  std::vector<u8> out(res.values);
  auto t1 = Clock::now();
  for (u64 b = 0; b < nblocks; ++b) {
    std::span<const u8> bytes(payload.data() + offsets[b], offsets[b + 1] - offsets[b]);
    u64 lo = b * zeta, hi = std::min(rows, lo + zeta);
    if (arithmetic) {
      ArithmeticDecoder dec(bytes);
      for (u64 r = lo; r < hi; ++r)
        for (u32 c = 0; c < opt.cols; ++c)
          out[r * opt.cols + c] = static_cast<u8>(dec.get_slot(model));
    } else {
      DelayedDecoder dec(bytes, opt.lambda);
      for (u64 r = lo; r < hi; ++r)
        for (u32 c = 0; c < opt.cols; ++c)
          out[r * opt.cols + c] = static_cast<u8>(dec.get_slot(model));
    }
  }
  double dec_s = ns_since(t1) / 1e9;
  if (out != data) raise(Errc::CorruptStream, "entropy bench round trip failed");

  res.payload_bytes = payload.size();
  res.bits_per_value = static_cast<double>(payload.size()) * 8.0 / static_cast<double>(res.values);
  res.encode_mb_s = static_cast<double>(res.raw_bytes) / 1e6 / enc_s;
  res.decode_mb_s = static_cast<double>(res.raw_bytes) / 1e6 / dec_s;
  return res;
}

}  // namespace bench
}  // namespace blitz
