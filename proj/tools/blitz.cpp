// blitz: semantic table compression with tuple-level random access.
//
//   blitz train <csv> -o <model.blz>        learn models from a csv
//   blitz compress <csv> -m <model.blz> -o <out.blz>
//   blitz decompress <out.blz> -o <csv>
//   blitz bench ycsb ...                    point-read / read-modify-write runs
//   blitz bench entropy ...                 codec throughput on synthetic data

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "blitz/driver.hpp"

using namespace blitz;

namespace {

void add_model_flags(CLI::App* cmd, driver::Options& opt, std::string& mode) {
  cmd->add_option("--schema", opt.schema_path, "JSON file overriding inferred column kinds");
  cmd->add_option("--mode", mode, "access (default) or archive")
      ->check(CLI::IsMember({"access", "archive"}));
  cmd->add_option("--zeta", opt.zeta, "tuples per compressed block (0 = one block)");
  cmd->add_option("--lambda", opt.lambda, "mark threshold (power of two, >= 2^16)");
  cmd->add_flag("--correlation", opt.correlation, "learn cross-column structure");
  cmd->add_option("--trigger", opt.training_trigger, "rows staged before training");
  cmd->add_option("--sample", opt.sample_size, "tuples sampled for structure learning");
  cmd->add_option("--seed", opt.seed, "sampling seed");
}

void print_report(const BenchReport& rep, const std::string& format) {
  if (format == "json") {
    nlohmann::json j{{"name", rep.name},
                     {"rows", rep.rows},
                     {"ops", rep.ops},
                     {"compression_factor", rep.compression_factor},
                     {"bits_per_tuple", rep.bits_per_tuple},
                     {"entropy_estimate", rep.entropy_estimate},
                     {"insert_p50_ns", rep.insert_p50_ns},
                     {"insert_p95_ns", rep.insert_p95_ns},
                     {"insert_p99_ns", rep.insert_p99_ns},
                     {"access_p50_ns", rep.access_p50_ns},
                     {"access_p95_ns", rep.access_p95_ns},
                     {"access_p99_ns", rep.access_p99_ns},
                     {"throughput_mb_s", rep.throughput_mb_s},
                     {"ops_per_s", rep.ops_per_s},
                     {"training_ms", rep.training_ms},
                     {"model_bytes", rep.model_bytes},
                     {"payload_bytes", rep.payload_bytes},
                     {"raw_bytes", rep.raw_bytes},
                     {"cache_hits", rep.cache_hits},
                     {"cache_misses", rep.cache_misses}};
    std::cout << j.dump(2) << '\n';
  } else {
    rep.print_kv(std::cout);
  }
}

void print_entropy(const bench::EntropyResult& res, u32 cols, const std::string& codec,
                   const std::string& format) {
  if (format == "json") {
    nlohmann::json j{{"name", "entropy"},
                     {"codec", codec},
                     {"cols", cols},
                     {"rows", res.rows},
                     {"values", res.values},
                     {"raw_bytes", res.raw_bytes},
                     {"payload_bytes", res.payload_bytes},
                     {"bits_per_value", res.bits_per_value},
                     {"encode_mb_s", res.encode_mb_s},
                     {"decode_mb_s", res.decode_mb_s}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "name=entropy\ncodec=" << codec << "\ncols=" << cols << "\nrows=" << res.rows
              << "\nvalues=" << res.values << "\nraw_bytes=" << res.raw_bytes
              << "\npayload_bytes=" << res.payload_bytes
              << "\nbits_per_value=" << res.bits_per_value
              << "\nencode_mb_s=" << res.encode_mb_s << "\ndecode_mb_s=" << res.decode_mb_s
              << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic table compressor with fast random access"};
  app.require_subcommand(1);

  driver::Options train_opt;
  std::string train_csv, train_out, train_mode = "access";
  auto* train = app.add_subcommand("train", "learn models from a csv file");
  train->add_option("csv", train_csv, "input csv with a header row")->required();
  train->add_option("-o,--output", train_out, "model file to write")->required();
  add_model_flags(train, train_opt, train_mode);

  std::string comp_csv, comp_model, comp_out;
  auto* compress = app.add_subcommand("compress", "compress a csv with trained models");
  compress->add_option("csv", comp_csv)->required();
  compress->add_option("-m,--model", comp_model, "model file from `train`")->required();
  compress->add_option("-o,--output", comp_out)->required();

  std::string dec_in, dec_out;
  auto* decompress = app.add_subcommand("decompress", "recover the csv from a compressed table");
  decompress->add_option("blz", dec_in)->required();
  decompress->add_option("-o,--output", dec_out)->required();

  auto* bench_cmd = app.add_subcommand("bench", "benchmark drivers");
  bench_cmd->require_subcommand(1);

  bench::YcsbOptions yopt;
  std::string ydist = "zipf", yworkload = "c", yformat = "kv";
  auto* ycsb = bench_cmd->add_subcommand("ycsb", "point reads / read-modify-writes");
  ycsb->add_option("--rows", yopt.rows, "table size");
  ycsb->add_option("--ops", yopt.ops, "operations to run");
  ycsb->add_option("--dist", ydist, "zipf or uniform")->check(CLI::IsMember({"zipf", "uniform"}));
  ycsb->add_option("--theta", yopt.theta, "zipf skew");
  ycsb->add_option("--workload", yworkload, "c (reads) or f (read-modify-write)")
      ->check(CLI::IsMember({"c", "f"}));
  ycsb->add_option("--cache", yopt.cache, "fast-path cache entries (0 = off)");
  ycsb->add_option("--zeta", yopt.zeta, "tuples per block");
  ycsb->add_option("--lambda", yopt.lambda, "mark threshold");
  ycsb->add_flag("--correlation", yopt.correlation, "learn cross-column structure");
  ycsb->add_option("--threads", yopt.threads, "read-only client threads (workload c)");
  ycsb->add_option("--seed", yopt.seed, "generator seed");
  ycsb->add_option("--format", yformat, "kv or json")->check(CLI::IsMember({"kv", "json"}));

  bench::EntropyOptions eopt;
  std::string ecodec = "delayed", eformat = "kv";
  u64 esize_mb = 64;
  auto* entropy = bench_cmd->add_subcommand("entropy", "codec throughput on uniform data");
  entropy->add_option("--cols", eopt.cols, "columns (2..1024)");
  entropy->add_option("--size-mb", esize_mb, "total table size in MiB");
  entropy->add_option("--codec", ecodec, "delayed or arithmetic")
      ->check(CLI::IsMember({"delayed", "arithmetic"}));
  entropy->add_option("--zeta", eopt.zeta, "tuples per block");
  entropy->add_option("--lambda", eopt.lambda, "mark threshold (delayed codec)");
  entropy->add_option("--seed", eopt.seed, "generator seed");
  entropy->add_option("--format", eformat, "kv or json")->check(CLI::IsMember({"kv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      train_opt.archive = train_mode == "archive";
      driver::train(train_csv, train_out, train_opt);
    } else if (*compress) {
      driver::compress(comp_csv, comp_model, comp_out);
    } else if (*decompress) {
      driver::decompress(dec_in, dec_out);
    } else if (*ycsb) {
      yopt.zipf = ydist == "zipf";
      yopt.workload = yworkload[0];
      print_report(bench::run_ycsb(yopt), yformat);
    } else if (*entropy) {
      eopt.total_bytes = esize_mb << 20;
      print_entropy(bench::run_entropy(eopt, ecodec == "arithmetic"), eopt.cols, ecodec, eformat);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
