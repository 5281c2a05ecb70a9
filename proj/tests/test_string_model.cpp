#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "blitz/delayed.hpp"
#include "blitz/string_model.hpp"

using namespace blitz;

namespace {

// Encodes the corpus as one stream and decodes it back, comparing the queue
// states after every string.
void round_trip(const StringModel& m, std::span<const std::string> strings) {
  DelayedEncoder enc;
  StringState enc_state;
  for (const std::string& s : strings) m.encode(enc, s, enc_state);
  std::vector<u8> bytes;
  enc.flush(bytes);

  DelayedDecoder dec(bytes);
  StringState dec_state;
  StringState replay;
  for (const std::string& s : strings) {
    REQUIRE(m.decode(dec, dec_state) == s);
    replay.push(s, m.queue_capacity());
    REQUIRE(dec_state.recent == replay.recent);
  }
  // Self-delimiting: the decoder consumed exactly the emitted codes.
  REQUIRE(dec.consumed_bytes() == bytes.size());
}

}  // namespace

TEST_CASE("identical strings concentrate on the most recent queue entry") {
  std::vector<std::string> corpus(200, "state-of-the-art");
  StringModel m = StringModel::fit(corpus, {.reset_every = 0});
  const CategoricalModel& prefix = m.prefix_index_model();
  // One NONE hit (the first string), every other hit is queue slot 0 with a
  // full-length match.
  CHECK(prefix.width(0) > prefix.width(m.none_slot()));
  CHECK(prefix.width(0) > kProbScale / 2);
  round_trip(m, corpus);
}

TEST_CASE("empty strings and empty queues") {
  std::vector<std::string> corpus{"", "alpha", "", "alpha", ""};
  StringModel m = StringModel::fit(corpus, {.reset_every = 0});
  round_trip(m, corpus);
}

TEST_CASE("shared url prefixes are captured by the queue") {
  std::vector<std::string> corpus;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    corpus.push_back("https://dblp.org/rec/conf/c" + std::to_string(rng() % 20) + "/paper" +
                     std::to_string(rng() % 1000));
  }
  StringModel m = StringModel::fit(corpus, {.reset_every = 0});
  // Nearly every string after the first matches a long shared prefix, so the
  // NONE slot should be a sliver.
  CHECK(m.prefix_index_model().width(m.none_slot()) < kProbScale / 16);
  round_trip(m, corpus);

  SECTION("compression beats byte-per-character on this corpus") {
    DelayedEncoder enc;
    StringState state;
    u64 raw = 0;
    for (const std::string& s : corpus) {
      m.encode(enc, s, state);
      raw += s.size();
    }
    std::vector<u8> bytes;
    enc.flush(bytes);
    CHECK(bytes.size() * 4 < raw);  // at least 4x on this synthetic corpus
  }
}

TEST_CASE("global dictionary holds the most frequent words") {
  std::vector<std::string> corpus;
  for (int i = 0; i < 60; ++i) corpus.push_back("red apple");
  for (int i = 0; i < 30; ++i) corpus.push_back("green pear");
  for (int i = 0; i < 10; ++i) corpus.push_back("blue plum");
  StringModel m = StringModel::fit(corpus, {.prefix_queue = 1, .dict_cap = 4, .reset_every = 1});
  // Occurrences: red/apple 60, green/pear 30, blue/plum 10; capped at 4 by
  // frequency then lexicographic order.
  REQUIRE(m.dictionary() == std::vector<std::string>{"apple", "red", "green", "pear"});
  round_trip(m, corpus);
}

TEST_CASE("block reset cadence is mirrored during fitting") {
  std::vector<std::string> corpus(64, "repeat");
  StringModel per_block = StringModel::fit(corpus, {.reset_every = 1});
  // With single-string blocks the queue is always empty, so everything is a
  // NONE hit.
  CHECK(per_block.prefix_index_model().width(per_block.none_slot()) > kProbScale / 2);
}

TEST_CASE("arbitrary byte strings round-trip exactly") {
  std::mt19937_64 rng(11);
  std::vector<std::string> corpus;
  for (int i = 0; i < 400; ++i) {
    std::string s;
    size_t len = rng() % 40;
    for (size_t k = 0; k < len; ++k) s.push_back(static_cast<char>(rng() & 0xff));
    corpus.push_back(std::move(s));
  }
  corpus.push_back(std::string("\x00\x01\xfe\xff", 4));
  StringModel m = StringModel::fit(corpus, {.reset_every = 0});
  round_trip(m, corpus);
}

TEST_CASE("values unseen in training stay encodable") {
  std::vector<std::string> corpus{"aaa bbb", "aaa ccc", "bbb ccc"};
  StringModel m = StringModel::fit(corpus, {.reset_every = 0});
  std::vector<std::string> fresh{
      "zzz qqq",           // unseen words, seen delimiter
      "aaa\tbbb",          // unseen delimiter
      "ddd&eee%fff",       // unseen everything
      std::string(5000, 'x'),  // length far outside the trained range
      "%&\x80\x81",        // delimiters only
  };
  round_trip(m, fresh);
}

TEST_CASE("random printable strings round-trip") {
  std::mt19937_64 rng(13);
  std::vector<std::string> corpus;
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789 ,.-/";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    size_t len = rng() % 30;
    for (size_t k = 0; k < len; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    corpus.push_back(std::move(s));
  }
  StringModel m = StringModel::fit(corpus, {.reset_every = 4});

  // Fresh draws from the same process, decoded block by block.
  std::vector<std::string> fresh;
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    size_t len = rng() % 30;
    for (size_t k = 0; k < len; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    fresh.push_back(std::move(s));
  }
  for (size_t at = 0; at < fresh.size(); at += 4) {
    size_t n = std::min<size_t>(4, fresh.size() - at);
    DelayedEncoder enc;
    StringState es;
    for (size_t i = 0; i < n; ++i) m.encode(enc, fresh[at + i], es);
    std::vector<u8> bytes;
    enc.flush(bytes);
    DelayedDecoder dec(bytes);
    StringState ds;
    for (size_t i = 0; i < n; ++i) REQUIRE(m.decode(dec, ds) == fresh[at + i]);
  }
}

TEST_CASE("string model serialization round-trips") {
  std::vector<std::string> corpus{"one two", "one three", "two three four", "five"};
  StringModel m = StringModel::fit(corpus, {.reset_every = 0});
  ByteWriter w;
  m.save(w);
  ByteReader r(w.bytes());
  StringModel back = StringModel::load(r);
  REQUIRE(r.remaining() == 0);
  ByteWriter w2;
  back.save(w2);
  REQUIRE(w.bytes() == w2.bytes());
  round_trip(back, corpus);

  // Cross-check: encode with the original, decode with the loaded model.
  DelayedEncoder enc;
  StringState es;
  for (const std::string& s : corpus) m.encode(enc, s, es);
  std::vector<u8> bytes;
  enc.flush(bytes);
  DelayedDecoder dec(bytes);
  StringState ds;
  for (const std::string& s : corpus) REQUIRE(back.decode(dec, ds) == s);
}

TEST_CASE("empty corpus is rejected") {
  std::vector<std::string> none;
  CHECK_THROWS_AS(StringModel::fit(none), Error);
}
