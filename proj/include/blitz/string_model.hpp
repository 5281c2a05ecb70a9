#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "blitz/numeric.hpp"

namespace blitz {

// Mutable companion of a string column stream: the queue of the most recent
// strings, mirrored by encoder and decoder. One stream must not be shared
// between threads; the model itself is immutable and may be.
struct StringState {
  std::vector<std::string> recent;

  void push(std::string s, size_t cap) {
    recent.insert(recent.begin(), std::move(s));
    if (recent.size() > cap) recent.resize(cap);
  }
  void reset() { recent.clear(); }
};

// Composite model for string columns. A string is sent as (queue index,
// shared-prefix length), then the remainder as delimiter-separated words: a
// word count, and per word its trailing delimiter and either a global
// dictionary hit or an escape followed by an order-1 byte chain ending in an
// end-of-word symbol.
struct StringModelConfig {
  u32 prefix_queue = 4;         // K most recent strings
  u32 dict_cap = u32{1} << 12;  // global dictionary size cap
  u32 reset_every = 0;          // mirror of block granularity; 0 = never reset
};

class StringModel {
 public:
  using Config = StringModelConfig;

  static constexpr u32 kEow = 256;   // end-of-word slot in byte models
  static constexpr u32 kByteEsc = 257;

  StringModel() = default;

  static StringModel fit(std::span<const std::string> values, Config cfg = {}) {
    if (values.empty()) raise(Errc::EmptyColumn, "no strings to fit");
    if (cfg.prefix_queue == 0) cfg.prefix_queue = 1;
    StringModel m;
    m.queue_cap_ = cfg.prefix_queue;

    std::vector<u64> prefix_counts(m.queue_cap_ + 1, 0);
    std::vector<i64> match_lens;
    std::vector<i64> word_counts;
    std::array<u64, 256> delim_counts{};
    u64 end_count = 0;
    std::unordered_map<std::string, u64> word_freq;
    std::vector<std::string> occurrences;

    StringState state;
    u64 row = 0;
    for (const std::string& s : values) {
      if (cfg.reset_every != 0 && row % cfg.reset_every == 0) state.reset();
      ++row;
      auto [pi, h] = m.best_prefix(state, s);
      ++prefix_counts[pi];
      if (pi != m.none_slot()) match_lens.push_back(static_cast<i64>(h));
      auto tokens = tokenize(std::string_view(s).substr(h));
      word_counts.push_back(static_cast<i64>(tokens.size()));
      for (const Token& t : tokens) {
        if (t.term < 0) {
          ++end_count;
        } else {
          ++delim_counts[t.term];
        }
        ++word_freq[std::string(t.word)];
        occurrences.emplace_back(t.word);
      }
      state.push(s, m.queue_cap_);
    }

    m.prefix_index_ = CategoricalModel::fit(prefix_counts, {.pin_all = true});
    if (match_lens.empty()) match_lens.push_back(0);
    m.match_len_ = NumericModel::fit_integers(match_lens);
    m.word_count_ = NumericModel::fit_integers(word_counts);

    for (u32 b = 0; b < 256; ++b)
      if (delim_counts[b] > 0) m.delim_vocab_.push_back(static_cast<u8>(b));
    m.delim_slot_of_.fill(-1);
    std::vector<u64> dcounts;
    for (u8 b : m.delim_vocab_) {
      m.delim_slot_of_[b] = static_cast<i32>(dcounts.size());
      dcounts.push_back(delim_counts[b]);
    }
    dcounts.push_back(end_count);  // END
    dcounts.push_back(0);          // ESC
    m.delimiter_ = CategoricalModel::fit(dcounts, {.pinned_tail = 2});

    m.build_dictionary(word_freq, cfg.dict_cap);
    m.build_char_models(occurrences);
    return m;
  }

  u32 queue_capacity() const { return queue_cap_; }
  u32 none_slot() const { return queue_cap_; }
  const CategoricalModel& prefix_index_model() const { return prefix_index_; }
  const NumericModel& match_len_model() const { return match_len_; }
  const NumericModel& word_count_model() const { return word_count_; }
  const CategoricalModel& delimiter_model() const { return delimiter_; }
  const CategoricalModel& dictionary_model() const { return global_dict_; }
  const std::vector<std::string>& dictionary() const { return dict_words_; }

  template <class Sink>
  void encode(Sink& sink, const std::string& s, StringState& state) const {
    auto [pi, h] = best_prefix(state, s);
    sink.put_set(prefix_index_, pi);
    if (pi != none_slot()) match_len_.encode(sink, static_cast<i64>(h));
    auto tokens = tokenize(std::string_view(s).substr(h));
    word_count_.encode(sink, static_cast<i64>(tokens.size()));
    for (const Token& t : tokens) {
      encode_terminator(sink, t.term);
      encode_word(sink, t.word);
    }
    state.push(s, queue_cap_);
  }

  template <class Source>
  std::string decode(Source& src, StringState& state) const {
    std::string s;
    u32 pi = src.get_slot(prefix_index_);
    if (pi != none_slot()) {
      i64 h = match_len_.decode_int(src);
      if (pi >= state.recent.size() || h < 0 ||
          static_cast<size_t>(h) > state.recent[pi].size())
        raise(Errc::CorruptStream, "prefix reference out of range");
      s.assign(state.recent[pi], 0, static_cast<size_t>(h));
    }
    i64 n = word_count_.decode_int(src);
    if (n < 0 || n > (i64{1} << 26)) raise(Errc::CorruptStream, "implausible word count");
    for (i64 i = 0; i < n; ++i) {
      i32 term = decode_terminator(src);
      decode_word(src, s);
      if (term >= 0) s.push_back(static_cast<char>(term));
    }
    state.push(s, queue_cap_);
    return s;
  }

  void save(ByteWriter& w) const {
    w.put<u32>(queue_cap_);
    prefix_index_.save(w);
    match_len_.save(w);
    word_count_.save(w);
    w.put<u32>(static_cast<u32>(delim_vocab_.size()));
    for (u8 b : delim_vocab_) w.put<u8>(b);
    delimiter_.save(w);
    w.put<u32>(static_cast<u32>(dict_words_.size()));
    for (const std::string& word : dict_words_) w.put_string(word);
    global_dict_.save(w);
    w.put<u32>(static_cast<u32>(char_models_.size()));
    for (const auto& [prev, model] : char_models_) {
      w.put<u8>(static_cast<u8>(prev));
      model.save(w);
    }
  }

  static StringModel load(ByteReader& r) {
    StringModel m;
    m.queue_cap_ = r.get<u32>();
    if (m.queue_cap_ == 0 || m.queue_cap_ > 1024) raise(Errc::CorruptStream, "bad prefix queue size");
    m.prefix_index_ = CategoricalModel::load(r);
    m.match_len_ = NumericModel::load(r);
    m.word_count_ = NumericModel::load(r);
    u32 nd = r.get<u32>();
    if (nd > 256) raise(Errc::CorruptStream, "bad delimiter vocabulary");
    m.delim_slot_of_.fill(-1);
    for (u32 i = 0; i < nd; ++i) {
      u8 b = r.get<u8>();
      m.delim_vocab_.push_back(b);
      m.delim_slot_of_[b] = static_cast<i32>(i);
    }
    m.delimiter_ = CategoricalModel::load(r);
    u32 nw = r.get<u32>();
    for (u32 i = 0; i < nw; ++i) m.dict_words_.push_back(r.get_string());
    for (u32 i = 0; i < nw; ++i) m.dict_index_[m.dict_words_[i]] = i;
    m.global_dict_ = CategoricalModel::load(r);
    u32 nc = r.get<u32>();
    for (u32 i = 0; i < nc; ++i) {
      u32 prev = r.get<u8>();
      m.char_models_[prev] = CategoricalModel::load(r);
    }
    m.fallback_char_ = uniform_byte_model();
    return m;
  }

  static bool is_word_byte(u8 b) {
    return (b >= '0' && b <= '9') || (b >= 'A' && b <= 'Z') || (b >= 'a' && b <= 'z');
  }

 private:
  struct Token {
    std::string_view word;
    i32 term;  // trailing delimiter byte, -1 when the string ends the word
  };

  static std::vector<Token> tokenize(std::string_view rest) {
    std::vector<Token> tokens;
    size_t start = 0;
    for (size_t i = 0; i < rest.size(); ++i) {
      if (!is_word_byte(static_cast<u8>(rest[i]))) {
        tokens.push_back(Token{rest.substr(start, i - start), static_cast<u8>(rest[i])});
        start = i + 1;
      }
    }
    if (start < rest.size()) tokens.push_back(Token{rest.substr(start), -1});
    return tokens;
  }

  // Longest shared prefix against the queue, ties to the most recent entry.
  std::pair<u32, size_t> best_prefix(const StringState& state, const std::string& s) const {
    u32 best = none_slot();
    size_t best_h = 0;
    for (u32 i = 0; i < state.recent.size(); ++i) {
      const std::string& q = state.recent[i];
      size_t h = 0;
      size_t cap = std::min(q.size(), s.size());
      while (h < cap && q[h] == s[h]) ++h;
      if (h > best_h) {
        best_h = h;
        best = i;
      }
    }
    return {best, best_h};
  }

  void build_dictionary(const std::unordered_map<std::string, u64>& freq, u32 cap) {
    std::vector<std::pair<std::string, u64>> by_freq(freq.begin(), freq.end());
    std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (by_freq.size() > cap) by_freq.resize(cap);
    std::vector<u64> counts;
    u64 dict_total = 0;
    for (auto& [word, count] : by_freq) {
      dict_index_[word] = static_cast<u32>(dict_words_.size());
      dict_words_.push_back(word);
      counts.push_back(count);
      dict_total += count;
    }
    u64 total = 0;
    for (const auto& [word, count] : freq) total += count;
    counts.push_back(total - dict_total);  // ESC
    global_dict_ = CategoricalModel::fit(counts, {.pinned_tail = 1});
  }

  void build_char_models(const std::vector<std::string>& occurrences) {
    std::map<u32, std::vector<u64>> counts;
    auto bump = [&](u32 prev, u32 slot) {
      auto it = counts.find(prev);
      if (it == counts.end()) it = counts.emplace(prev, std::vector<u64>(258, 0)).first;
      ++it->second[slot];
    };
    for (const std::string& word : occurrences) {
      if (dict_index_.count(word)) continue;
      u32 prev = 0;
      for (char ch : word) {
        u8 b = static_cast<u8>(ch);
        bump(prev, b);
        prev = b;
      }
      bump(prev, kEow);
    }
    for (auto& [prev, c] : counts) {
      char_models_[prev] = CategoricalModel::fit(c, {.pinned_tail = 2});
    }
    fallback_char_ = uniform_byte_model();
  }

  static CategoricalModel uniform_byte_model() {
    std::vector<u64> counts(258, 0);
    return CategoricalModel::fit(counts, {.pin_all = true});
  }

  const CategoricalModel& char_model(u32 prev) const {
    auto it = char_models_.find(prev);
    return it == char_models_.end() ? fallback_char_ : it->second;
  }

  template <class Sink>
  void encode_terminator(Sink& sink, i32 term) const {
    if (term < 0) {
      sink.put_set(delimiter_, end_slot());
      return;
    }
    i32 slot = delim_slot_of_[term];
    if (slot >= 0) {
      sink.put_set(delimiter_, static_cast<u32>(slot));
    } else {
      sink.put_set(delimiter_, esc_delim_slot());
      sink.put_uniform(8, static_cast<u32>(term));
    }
  }

  template <class Source>
  i32 decode_terminator(Source& src) const {
    u32 slot = src.get_slot(delimiter_);
    if (slot == end_slot()) return -1;
    if (slot == esc_delim_slot()) return static_cast<i32>(src.get_uniform(8));
    return delim_vocab_[slot];
  }

  template <class Sink>
  void encode_word(Sink& sink, std::string_view word) const {
    auto it = dict_index_.find(std::string(word));
    if (it != dict_index_.end()) {
      sink.put_set(global_dict_, it->second);
      return;
    }
    sink.put_set(global_dict_, esc_dict_slot());
    u32 prev = 0;
    for (char ch : word) {
      u8 b = static_cast<u8>(ch);
      const CategoricalModel& cm = char_model(prev);
      if (cm.width(b) > 0) {
        sink.put_set(cm, b);
      } else {
        sink.put_set(cm, kByteEsc);
        sink.put_uniform(8, b);
      }
      prev = b;
    }
    sink.put_set(char_model(prev), kEow);
  }

  template <class Source>
  void decode_word(Source& src, std::string& out) const {
    u32 slot = src.get_slot(global_dict_);
    if (slot != esc_dict_slot()) {
      out += dict_words_[slot];
      return;
    }
    u32 prev = 0;
    for (size_t len = 0;; ++len) {
      if (len > (size_t{1} << 20)) raise(Errc::CorruptStream, "unterminated escaped word");
      u32 cslot = src.get_slot(char_model(prev));
      if (cslot == kEow) break;
      u8 b = cslot == kByteEsc ? static_cast<u8>(src.get_uniform(8)) : static_cast<u8>(cslot);
      out.push_back(static_cast<char>(b));
      prev = b;
    }
  }

  u32 end_slot() const { return static_cast<u32>(delim_vocab_.size()); }
  u32 esc_delim_slot() const { return static_cast<u32>(delim_vocab_.size()) + 1; }
  u32 esc_dict_slot() const { return static_cast<u32>(dict_words_.size()); }

  u32 queue_cap_ = 4;
  CategoricalModel prefix_index_;
  NumericModel match_len_;
  NumericModel word_count_;
  std::vector<u8> delim_vocab_;
  std::array<i32, 256> delim_slot_of_{};
  CategoricalModel delimiter_;
  std::vector<std::string> dict_words_;
  std::unordered_map<std::string, u32> dict_index_;
  CategoricalModel global_dict_;
  std::map<u32, CategoricalModel> char_models_;
  CategoricalModel fallback_char_;
};

}  // namespace blitz
