// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
// the measured numbers; the process exit code is the number of failures.

#include <cstdio>
#include <random>

#include "blitz/driver.hpp"

using namespace blitz;
using bench::Clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& label, const std::string& detail) {
  std::printf("[%2d] %s  %-34s %s\n", id, ok ? "PASS" : "FAIL", label.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
  va_list ap;
  va_start(ap, f);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

CategoricalModel partition_around(u32 lo, u32 hi, u32& slot_out) {
  std::vector<IntervalSet> sets;
  u32 slot = 0;
  if (lo > 0) {
    sets.push_back(IntervalSet::single(0, lo));
    slot = 1;
  }
  sets.push_back(IntervalSet::single(lo, hi));
  if (hi < kProbScale) sets.push_back(IntervalSet::single(hi, kProbScale));
  slot_out = slot;
  return CategoricalModel::from_intervals(std::move(sets));
}

// --- 1: golden four-interval block ----------------------------------------

void criterion_golden_block() {
  u32 s1, s2, s3, s4;
  CategoricalModel m1 = partition_around(32768, 65536, s1);
  CategoricalModel m2 = partition_around(10011, 10027, s2);
  CategoricalModel m3 = partition_around(3, 32772, s3);
  CategoricalModel m4 = partition_around(1023, 1028, s4);

  bool ok = true;
  std::vector<u8> bytes;
  EncodeStats stats;
  double best_ns = 1e18;
  for (int rep = 0; rep < 3; ++rep) {
    bytes.clear();
    auto t0 = Clock::now();
    DelayedEncoder enc;
    enc.put_set(m1, s1);
    enc.put_set(m2, s2);
    enc.put_set(m3, s3);
    enc.put_set(m4, s4);
    stats = enc.flush(bytes);
    DelayedDecoder dec(bytes);
    ok &= dec.get_slot(m1) == s1 && dec.get_slot(m2) == s2 && dec.get_slot(m3) == s3 &&
          dec.get_slot(m4) == s4;
    best_ns = std::min(best_ns, bench::ns_since(t0));
  }
  ok &= bytes == std::vector<u8>{0x80, 0x40, 0x27, 0x1D};
  ok &= stats.marked == std::vector<bool>{false, false, true, true};
  ok &= stats.leftover_options == 20;
  ok &= best_ns < 1e6;
  report(1, ok, "golden block bytes",
         fmt("bytes=%02x%02x%02x%02x marked=3,4 leftover=%llu time=%.0fns", bytes[0], bytes[1],
             bytes[2], bytes[3], (unsigned long long)stats.leftover_options, best_ns));
}

// --- 2: mixed-radix unit ----------------------------------------------------

void criterion_radix() {
  std::vector<u32> bases{3, 4, 7};
  auto digits = radix_decompose(13, bases);
  bool ok = digits == std::vector<u32>{0, 1, 6};
  report(2, ok, "mixed-radix decomposition",
         fmt("13 over (3,4,7) -> (%u,%u,%u)", digits[0], digits[1], digits[2]));
}

// --- 3: alias reconstruction ------------------------------------------------

void criterion_alias_reconstruction() {
  std::mt19937_64 rng(0xa11a5);
  u64 checked = 0;
  bool ok = true;
  for (int t = 0; t < 1000 && ok; ++t) {
    u32 n = 1 + static_cast<u32>(rng() % (1u << 12));
    std::vector<u64> counts(n);
    for (u64& c : counts) c = rng() % 997;
    counts[rng() % n] += 1;
    CategoricalModel m = CategoricalModel::fit(counts);
    // Reconstruction: the interval set of every slot is exactly as wide as
    // its quantized frequency.
    u64 total = 0;
    for (u32 s = 0; s < m.slot_count(); ++s) {
      ok &= m.intervals(s).width() == m.width(s);
      total += m.width(s);
    }
    ok &= total == kProbScale;
    // Exhaustive scan: each slot owns exactly width(slot) codes.
    std::vector<u32> owned(m.slot_count(), 0);
    for (u32 code = 0; code < kProbScale; ++code) ++owned[m.inv_translate(code).slot];
    for (u32 s = 0; s < m.slot_count(); ++s) ok &= owned[s] == m.width(s);
    ++checked;
  }
  report(3, ok, "alias reconstruction",
         fmt("%llu random distributions, 2^16 codes each, zero drift",
             (unsigned long long)checked));
}

// --- 4: round-trip identity --------------------------------------------------

void criterion_round_trip() {
  auto t0 = Clock::now();
  u64 tuples_done = 0, mismatches = 0;
  for (bool correlation : {false, true}) {
    for (u32 zeta : {1u, 8u, 128u}) {
      EngineConfig cfg;
      cfg.codec.tuples_per_block = zeta;
      cfg.correlation = correlation;
      CompressedTable table(bench::mixed_schema(), cfg);
      bench::MixedRowGenerator gen(1000 + zeta + correlation);
      const u64 rows = 166000;  // 6 configurations, ~1e6 tuples total
      std::vector<Tuple> shadow;
      shadow.reserve(rows);
      for (u64 i = 0; i < rows; ++i) {
        shadow.push_back(gen.next());
        table.insert(shadow.back());
      }
      table.flush();
      table.scan([&](u64 row, const Tuple& t) {
        mismatches += !tuple_matches(table.schema(), t, shadow[row]);
      });
      std::mt19937_64 rng(7 + zeta);
      for (int i = 0; i < 2000; ++i) {
        u64 row = rng() % rows;
        mismatches += !tuple_matches(table.schema(), table.get(row), shadow[row]);
      }
      tuples_done += rows;
    }
  }
  double secs = bench::ns_since(t0) / 1e9;
  bool ok = mismatches == 0 && secs < 120.0;
  report(4, ok, "round-trip identity",
         fmt("%llu tuples, corr on/off, zeta {1,8,128}, %llu mismatches, %.1fs",
             (unsigned long long)tuples_done, (unsigned long long)mismatches, secs));
}

// --- 5: size bound -----------------------------------------------------------

void criterion_size_bound() {
  std::mt19937_64 rng(0xb0d);
  bool ok = true;
  double worst_slack = 1e18;
  for (int trial = 0; trial < 10; ++trial) {
    u32 slots = 2 + static_cast<u32>(rng() % 500);
    std::vector<u64> counts(slots);
    for (u64& c : counts) c = 1 + rng() % 300;
    CategoricalModel m = CategoricalModel::fit(counts);
    std::vector<double> weights(slots);
    for (u32 i = 0; i < slots; ++i) weights[i] = static_cast<double>(m.width(i));
    std::discrete_distribution<u32> pick(weights.begin(), weights.end());

    const size_t n = 20000;
    std::vector<u32> chosen(n);
    double entropy_bits = 0;
    for (size_t i = 0; i < n; ++i) {
      chosen[i] = pick(rng);
      entropy_bits += 16.0 - std::log2(static_cast<double>(m.width(chosen[i])));
    }
    struct Cfg {
      u64 lambda;
      size_t zeta;
    };
    for (Cfg cfg : {Cfg{u64{1} << 16, 1}, Cfg{u64{1} << 24, n}}) {
      std::vector<u8> payload;
      DelayedEncoder enc(cfg.lambda);
      for (size_t i = 0; i < n; ++i) {
        enc.put_set(m, chosen[i]);
        if (enc.pending() == cfg.zeta || i + 1 == n) enc.flush(payload);
      }
      double bound = entropy_bits +
                     (std::floor(double(n) / double(cfg.zeta)) + 1) * std::log2(double(cfg.lambda)) +
                     double(n) * std::log2(1.0 / (1.0 - 65535.0 / double(cfg.lambda)));
      double bits = double(payload.size()) * 8;
      ok &= bits <= bound;
      worst_slack = std::min(worst_slack, bound - bits);
    }
  }
  report(5, ok, "delayed-coding size bound",
         fmt("10 streams x 2 configs, min slack under bound %.1f bits", worst_slack));
}

// --- 6: archive mode near entropy ---------------------------------------------

void criterion_archive_entropy() {
  bench::EntropyOptions opt;
  opt.cols = 16;
  opt.total_bytes = u64{16} << 20;
  opt.zeta = 4096;
  opt.lambda = u64{1} << 24;
  bench::EntropyResult res = bench::run_entropy(opt, /*arithmetic=*/false);
  double limit = std::log2(255.0) + 0.1;
  bool ok = res.bits_per_value <= limit;
  report(6, ok, "archive mode near entropy",
         fmt("%.4f bits/value vs limit %.4f (log2 255 = %.4f)", res.bits_per_value, limit,
             std::log2(255.0)));
}

// --- 7: granularity plateau ----------------------------------------------------

struct GranularityPoint {
  double compression_factor;
  double median_get_ns;
};

GranularityPoint run_granularity(u32 zeta) {
  TableSchema schema([] {
    std::vector<ColumnSpec> cols;
    for (int c = 0; c < 12; ++c) cols.push_back({"c" + std::to_string(c), ColumnKind::Categorical, 0});
    return cols;
  }());
  EngineConfig cfg;
  cfg.codec.tuples_per_block = zeta;
  cfg.training_trigger = u64{1} << 14;
  CompressedTable table(schema, cfg);

  const u64 rows = u64{1} << 15;
  std::vector<ZipfGenerator> gens;
  for (int c = 0; c < 12; ++c) gens.emplace_back(4096, 1.1, 900 + c);
  for (u64 i = 0; i < rows; ++i) {
    Tuple t;
    for (int c = 0; c < 12; ++c) t.push_back("v" + std::to_string(gens[c].next()));
    table.insert(std::move(t));
  }
  table.flush();

  std::mt19937_64 rng(17);
  std::vector<double> lat;
  lat.reserve(20000);
  for (int i = 0; i < 20000; ++i) {
    u64 row = rng() % rows;
    auto t0 = Clock::now();
    volatile u64 sink = std::get<std::string>(table.get(row)[0]).size();
    (void)sink;
    lat.push_back(bench::ns_since(t0));
  }
  return {table.stats().compression_factor, bench::percentile(lat, 0.5)};
}

void criterion_granularity() {
  GranularityPoint z1 = run_granularity(1);
  GranularityPoint z8 = run_granularity(8);
  GranularityPoint z128 = run_granularity(128);
  bool plateau = z8.compression_factor >= 0.95 * z128.compression_factor;
  bool latency = z1.median_get_ns < z8.median_get_ns && z1.median_get_ns < z128.median_get_ns;
  report(7, plateau && latency, "granularity plateau",
         fmt("cf: z1=%.2f z8=%.2f z128=%.2f (z8/z128=%.3f); median get ns: %d/%d/%d",
             z1.compression_factor, z8.compression_factor, z128.compression_factor,
             z8.compression_factor / z128.compression_factor, int(z1.median_get_ns),
             int(z8.median_get_ns), int(z128.median_get_ns)));
}

// --- 8: codec decode speed ordering ----------------------------------------------

void criterion_codec_speed() {
  bool ok = true;
  std::string detail;
  for (u32 cols : {16u, 256u}) {
    bench::EntropyOptions opt;
    opt.cols = cols;
    opt.total_bytes = u64{64} << 20;
    bench::EntropyResult delayed = bench::run_entropy(opt, false);
    bench::EntropyResult arith = bench::run_entropy(opt, true);
    double ratio = delayed.decode_mb_s / arith.decode_mb_s;
    ok &= ratio > 1.0;
    detail += fmt("cols=%u: delayed %.0f MB/s vs arithmetic %.0f MB/s (%.2fx%s) ", cols,
                  delayed.decode_mb_s, arith.decode_mb_s, ratio,
                  ratio >= 1.5 ? "" : ", below 1.5x target");
  }
  report(8, ok, "decode speed ordering", detail);
}

// --- 9: constant-time inverse translation ------------------------------------------

double time_lookups(const CategoricalModel& m, bool alias_path) {
  std::mt19937_64 rng(5);
  std::vector<Code16> codes(1u << 14);
  for (Code16& c : codes) c = static_cast<Code16>(rng() & 0xffff);
  u64 sink = 0;
  const int reps = 300;
  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    for (Code16 c : codes) {
      if (alias_path) {
        sink += m.inv_translate(c).slot;
      } else {
        sink += m.cdf_locate(c);
      }
    }
  }
  double ns = bench::ns_since(t0);
  if (sink == 0xdead) std::printf("?");
  return ns / (double(reps) * codes.size());
}

void criterion_constant_time() {
  auto model_with = [](u32 n) {
    std::vector<u64> counts(n, 1);
    return CategoricalModel::fit(counts);
  };
  CategoricalModel small = model_with(1u << 4);
  CategoricalModel large = model_with(1u << 14);
  double alias_small = time_lookups(small, true);
  double alias_large = time_lookups(large, true);
  double cdf_small = time_lookups(small, false);
  double cdf_large = time_lookups(large, false);
  double alias_ratio = alias_large / alias_small;
  double cdf_ratio = cdf_large / cdf_small;
  bool ok = alias_ratio <= 2.0 && cdf_ratio > 1.25;
  report(9, ok, "constant-time inverse translation",
         fmt("alias %.2f->%.2f ns (x%.2f); binary search %.2f->%.2f ns (x%.2f)", alias_small,
             alias_large, alias_ratio, cdf_small, cdf_large, cdf_ratio));
}

// --- 10: random access latency ------------------------------------------------------

void criterion_random_access() {
  EngineConfig cfg;
  CompressedTable table(bench::mixed_schema(), cfg);
  bench::MixedRowGenerator gen(77);
  const u64 rows = 100000;
  for (u64 i = 0; i < rows; ++i) table.insert(gen.next());
  table.flush();

  std::mt19937_64 rng(78);
  const u64 ops = 100000;
  std::vector<double> lat;
  lat.reserve(ops);
  u64 decoded_before = table.blocks_decoded();
  for (u64 i = 0; i < ops; ++i) {
    u64 row = rng() % rows;
    auto t0 = Clock::now();
    volatile u64 sink = std::get<i64>(table.get(row)[1]);
    (void)sink;
    lat.push_back(bench::ns_since(t0));
  }
  u64 decoded = table.blocks_decoded() - decoded_before;
  double median = bench::percentile(lat, 0.5);
  bool ok = median <= 5000.0 && decoded == ops;
  report(10, ok, "random access latency",
         fmt("median get %.0f ns (limit 5000), p99 %.0f ns, %llu blocks decoded for %llu gets",
             median, bench::percentile(lat, 0.99), (unsigned long long)decoded,
             (unsigned long long)ops));
}

// --- 11: fast-path cache -------------------------------------------------------------

void criterion_cache() {
  auto run = [](bool zipf, size_t cache) {
    bench::YcsbOptions opt;
    opt.rows = 100000;
    opt.ops = 100000;
    opt.zipf = zipf;
    opt.theta = 0.99;
    opt.workload = 'f';
    opt.cache = cache;
    opt.seed = 101;
    return bench::run_ycsb(opt);
  };
  BenchReport zipf_off = run(true, 0);
  BenchReport zipf_on = run(true, 10000);
  BenchReport uni_off = run(false, 0);
  BenchReport uni_on = run(false, 10000);
  bool ok = zipf_on.ops_per_s > zipf_off.ops_per_s;
  double hit_rate = double(zipf_on.cache_hits) / double(zipf_on.cache_hits + zipf_on.cache_misses);
  report(11, ok, "fast-path cache",
         fmt("zipf: %.0f -> %.0f ops/s (hit rate %.0f%%); uniform: %.0f -> %.0f ops/s (reported)",
             zipf_off.ops_per_s, zipf_on.ops_per_s, 100.0 * hit_rate, uni_off.ops_per_s,
             uni_on.ops_per_s));
}

// --- 12: structure learning ------------------------------------------------------------

void criterion_structure() {
  TableSchema schema({{"name", ColumnKind::Categorical, 0}, {"gender", ColumnKind::Categorical, 0}});
  std::mt19937_64 rng(0xf1613);
  std::uniform_real_distribution<double> u(0, 1);
  auto gen_row = [&]() {
    bool taylor = u(rng) < 0.8;
    bool female = u(rng) < (taylor ? 0.8 : 0.5);
    return Tuple{std::string(taylor ? "taylor" : "alex"), std::string(female ? "female" : "male")};
  };

  const u64 rows = u64{1} << 16;
  std::vector<Tuple> data;
  for (u64 i = 0; i < rows; ++i) data.push_back(gen_row());

  auto compress_with = [&](bool correlation) {
    EngineConfig cfg;
    cfg.codec.tuples_per_block = 128;
    cfg.correlation = correlation;
    CompressedTable table(schema, cfg);
    for (const Tuple& t : data) table.insert(t);
    table.flush();
    return std::move(table);
  };
  CompressedTable with = compress_with(true);
  CompressedTable without = compress_with(false);

  bool parent_ok = with.structure().parent[1] == 0;
  double bits_with = with.stats().payload_bytes * 8.0 / double(rows);
  double bits_without = without.stats().payload_bytes * 8.0 / double(rows);
  bool ok = parent_ok && bits_with < bits_without;
  report(12, ok, "structure learning",
         fmt("gender parent=%s; %.3f bits/tuple with correlation vs %.3f without",
             parent_ok ? "name" : "(none)", bits_with, bits_without));
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_golden_block();
  criterion_radix();
  criterion_alias_reconstruction();
  criterion_round_trip();
  criterion_size_bound();
  criterion_archive_entropy();
  criterion_granularity();
  criterion_codec_speed();
  criterion_constant_time();
  criterion_random_access();
  criterion_cache();
  criterion_structure();
  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures;
}
