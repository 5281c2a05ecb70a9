#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "blitz/arithmetic.hpp"
#include "blitz/numeric.hpp"
#include "blitz/string_model.hpp"

using namespace blitz;

namespace {

// Exact unit-interval narrowing with rational bounds, the real-arithmetic
// reference for the integer coder.
struct Fraction {
  u64 num, den;
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

Fraction reduce(u64 num, u64 den) {
  u64 g = std::gcd(num, den);
  return {num / g, den / g};
}

struct RationalInterval {
  Fraction lo, hi;
};

RationalInterval narrow(RationalInterval cur, Fraction sym_lo, Fraction sym_hi) {
  // lo + (hi-lo)*s for both bounds, all exact.
  auto mix = [&](Fraction s) {
    u64 num = cur.lo.num * (cur.hi.den * s.den) +
              (cur.hi.num * cur.lo.den - cur.lo.num * cur.hi.den) * s.num;
    u64 den = cur.lo.den * cur.hi.den * s.den;
    return reduce(num, den);
  };
  return {mix(sym_lo), mix(sym_hi)};
}

}  // namespace

TEST_CASE("rational oracle pins the textbook narrowing") {
  // Alphabet {a, b, c} with probabilities 1/5, 1/2, 3/10; message "bab".
  Fraction ca{0, 1}, cb{1, 5}, cc{7, 10}, top{1, 1};
  RationalInterval cur{{0, 1}, {1, 1}};
  cur = narrow(cur, cb, cc);  // b
  cur = narrow(cur, ca, cb);  // a
  cur = narrow(cur, cb, cc);  // b
  CHECK(cur.lo == Fraction{11, 50});   // 0.22
  CHECK(cur.hi == Fraction{27, 100});  // 0.27

  // Smallest dyadic interval [M/2^k, (M+1)/2^k] inside [0.22, 0.27): 6 bits,
  // M = 15.
  u32 k = 0;
  u64 m = 0;
  for (;; ++k) {
    u64 scale = u64{1} << k;
    m = (cur.lo.num * scale + cur.lo.den - 1) / cur.lo.den;  // ceil
    if ((m + 1) * cur.hi.den <= cur.hi.num * scale) break;
    REQUIRE(k < 32);
  }
  CHECK(k == 6);
  CHECK(m == 15);  // (.001111) in binary
}

TEST_CASE("integer coder round-trips the textbook message") {
  std::vector<u64> counts{2, 5, 3};  // quantizes to 13107 / 32768 / 19661
  CategoricalModel model = CategoricalModel::fit(counts);
  REQUIRE(model.width(0) == 13107);
  REQUIRE(model.width(1) == 32768);
  REQUIRE(model.width(2) == 19661);

  ArithmeticEncoder enc;
  for (u32 s : {1u, 0u, 1u}) enc.put_set(model, s);
  std::vector<u8> bytes;
  enc.finish(bytes);
  CHECK(bytes.size() <= 2);  // ~2.3 bits of entropy plus termination

  ArithmeticDecoder dec(bytes);
  CHECK(dec.get_slot(model) == 1);
  CHECK(dec.get_slot(model) == 0);
  CHECK(dec.get_slot(model) == 1);
}

TEST_CASE("degenerate payloads") {
  SECTION("a full-range interval costs nothing") {
    ArithmeticEncoder enc;
    enc.put_interval(kFullInterval);
    std::vector<u8> bytes;
    enc.finish(bytes);
    CHECK(bytes.empty());
  }
  SECTION("empty message encodes to empty output") {
    ArithmeticEncoder enc;
    std::vector<u8> bytes;
    enc.finish(bytes);
    CHECK(bytes.empty());
  }
}

TEST_CASE("long low-probability runs exercise early emission") {
  // Width-1 intervals underflow the window every step.
  u32 slot = 0;
  std::vector<IntervalSet> sets;
  sets.push_back(IntervalSet::single(7, 8));
  sets.push_back(IntervalSet::single(0, 7));
  sets.push_back(IntervalSet::single(8, kProbScale));
  CategoricalModel m = CategoricalModel::from_intervals(std::move(sets));
  ArithmeticEncoder enc;
  for (int i = 0; i < 100; ++i) enc.put_set(m, slot);
  std::vector<u8> bytes;
  enc.finish(bytes);
  CHECK(bytes.size() >= 100 * 2 - 2);  // ~16 bits per symbol
  ArithmeticDecoder dec(bytes);
  for (int i = 0; i < 100; ++i) REQUIRE(dec.get_slot(m) == slot);
}

TEST_CASE("randomized round trips across model families") {
  std::mt19937_64 rng(29);

  // Categorical, numeric and string models all stream through the same
  // coder interface.
  std::vector<u64> city_counts{50, 30, 12, 8};
  CategoricalModel city = CategoricalModel::fit(city_counts);

  std::vector<i64> ints(4000);
  for (i64& x : ints) x = static_cast<i64>(rng() % 100000);
  NumericModel num = NumericModel::fit_integers(ints);

  std::vector<double> doubles(4000);
  for (double& x : doubles) x = static_cast<double>(rng() % 1000000) / 1024.0;
  NumericModel dbl = NumericModel::fit_doubles(doubles, 1e-6);

  std::vector<std::string> corpus;
  const char* stems[] = {"alpha", "come", "delta", "set", "go"};
  for (int i = 0; i < 500; ++i) {
    std::string s = "id-";
    s += stems[rng() % 5];
    if (rng() % 3 == 0) s += "/" + std::to_string(rng() % 50);
    corpus.push_back(s);
  }
  StringModel str = StringModel::fit(corpus, {.reset_every = 0});

  for (int trial = 0; trial < 200; ++trial) {
    u32 n = 1 + static_cast<u32>(rng() % 40);
    std::vector<u32> cities(n);
    std::vector<i64> xs(n);
    std::vector<double> ds(n);
    std::vector<std::string> ss(n);
    ArithmeticEncoder enc;
    StringState enc_state;
    for (u32 i = 0; i < n; ++i) {
      cities[i] = static_cast<u32>(rng() % 4);
      xs[i] = static_cast<i64>(rng() % 200000);  // may overflow the range: outliers
      ds[i] = doubles[rng() % doubles.size()];
      ss[i] = corpus[rng() % corpus.size()];
      if (rng() % 7 == 0) ss[i] += "\xff\x01 raw bytes";
      enc.put_set(city, cities[i]);
      num.encode(enc, xs[i]);
      dbl.encode(enc, ds[i]);
      str.encode(enc, ss[i], enc_state);
    }
    std::vector<u8> bytes;
    enc.finish(bytes);

    ArithmeticDecoder dec(bytes);
    StringState dec_state;
    for (u32 i = 0; i < n; ++i) {
      REQUIRE(dec.get_slot(city) == cities[i]);
      REQUIRE(num.decode_int(dec) == xs[i]);
      double back = dbl.decode_double(dec);
      REQUIRE(std::abs(back - ds[i]) < 1e-6);
      REQUIRE(str.decode(dec, dec_state) == ss[i]);
    }
  }
}

TEST_CASE("per-block output stays within 48 bits of the entropy") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    u32 slots = 2 + static_cast<u32>(rng() % 200);
    std::vector<u64> counts(slots);
    for (u64& c : counts) c = 1 + rng() % 100;
    CategoricalModel m = CategoricalModel::fit(counts);
    std::vector<double> weights(slots);
    for (u32 i = 0; i < slots; ++i) weights[i] = static_cast<double>(m.width(i));
    std::discrete_distribution<u32> pick(weights.begin(), weights.end());

    u32 block = 1 + static_cast<u32>(rng() % 8);  // tuple-sized blocks
    for (int b = 0; b < 50; ++b) {
      double entropy_bits = 0;
      ArithmeticEncoder enc;
      std::vector<u32> chosen(block);
      for (u32 i = 0; i < block; ++i) {
        chosen[i] = pick(rng);
        entropy_bits += 16.0 - std::log2(static_cast<double>(m.width(chosen[i])));
        enc.put_set(m, chosen[i]);
      }
      std::vector<u8> bytes;
      enc.finish(bytes);
      REQUIRE(static_cast<double>(bytes.size()) * 8 <= entropy_bits + 48.0);

      ArithmeticDecoder dec(bytes);
      for (u32 i = 0; i < block; ++i) REQUIRE(dec.get_slot(m) == chosen[i]);
    }
  }
}
