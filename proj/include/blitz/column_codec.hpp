#pragma once

#include <map>
#include <memory>
#include <span>
#include <unordered_map>

#include "blitz/schema.hpp"
#include "blitz/string_model.hpp"

namespace blitz {

// Escaped values travel as a 16-bit length followed by big-endian byte pairs.
template <class Sink>
void put_raw_bytes(Sink& sink, std::string_view bytes) {
  if (bytes.size() > 0xffff) raise(Errc::CapacityError, "escaped value longer than 64 KiB");
  sink.put_uniform(16, static_cast<u32>(bytes.size()));
  for (size_t i = 0; i < bytes.size(); i += 2) {
    u32 chunk = static_cast<u32>(static_cast<u8>(bytes[i])) << 8;
    if (i + 1 < bytes.size()) chunk |= static_cast<u8>(bytes[i + 1]);
    sink.put_uniform(16, chunk);
  }
}

template <class Source>
std::string get_raw_bytes(Source& src) {
  u32 n = src.get_uniform(16);
  std::string s;
  s.reserve(n);
  for (u32 i = 0; i < n; i += 2) {
    u32 chunk = src.get_uniform(16);
    s.push_back(static_cast<char>(chunk >> 8));
    if (i + 1 < n) s.push_back(static_cast<char>(chunk & 0xff));
  }
  return s;
}

// Distribution over the distinct values of one categorical column. Values
// are interned in first-appearance order; an optional trailing escape slot
// carries anything the model has never seen as raw bytes.
class CategoricalColumnModel {
 public:
  CategoricalColumnModel() = default;

  template <class Get>
  static CategoricalColumnModel fit(size_t n, Get&& value_at, bool with_escape) {
    CategoricalColumnModel m;
    m.has_escape_ = with_escape;
    std::vector<u64> counts;
    for (size_t i = 0; i < n; ++i) {
      const std::string& v = value_at(i);
      auto [it, inserted] = m.index_.try_emplace(v, static_cast<u32>(m.vocab_.size()));
      if (inserted) {
        m.vocab_.push_back(v);
        counts.push_back(0);
      }
      ++counts[it->second];
    }
    size_t cap = kProbScale - (with_escape ? 1 : 0);
    if (m.vocab_.size() > cap) {
      if (!with_escape) raise(Errc::CapacityError, "too many distinct values for one model");
      m.shrink_vocab(counts, cap);
    }
    if (with_escape) counts.push_back(0);
    m.dist_ = CategoricalModel::fit(counts, {.pinned_tail = with_escape ? size_t{1} : size_t{0}});
    return m;
  }

  static CategoricalColumnModel fit(std::span<const std::string> values, bool with_escape) {
    return fit(values.size(), [&](size_t i) -> const std::string& { return values[i]; },
               with_escape);
  }

  u32 vocab_size() const { return static_cast<u32>(vocab_.size()); }
  bool has_escape() const { return has_escape_; }
  u32 escape_slot() const { return static_cast<u32>(vocab_.size()); }
  const CategoricalModel& distribution() const { return dist_; }
  const std::string& value_of(u32 slot) const { return vocab_[slot]; }

  // Slot of a value in the vocabulary, ignoring whether it is encodable.
  std::optional<u32> slot_of(const std::string& v) const {
    auto it = index_.find(v);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  template <class Sink>
  void encode(Sink& sink, const std::string& v) const {
    auto slot = slot_of(v);
    if (slot && dist_.width(*slot) > 0) {
      sink.put_set(dist_, *slot);
      return;
    }
    if (!has_escape_) raise(Errc::UnknownSymbol, "value not in model: " + v);
    sink.put_set(dist_, escape_slot());
    put_raw_bytes(sink, v);
  }

  template <class Source>
  std::string decode(Source& src) const {
    u32 slot = src.get_slot(dist_);
    if (has_escape_ && slot == escape_slot()) return get_raw_bytes(src);
    return vocab_[slot];
  }

  void save(ByteWriter& w) const {
    w.put<u8>(has_escape_ ? 1 : 0);
    w.put<u32>(static_cast<u32>(vocab_.size()));
    for (const std::string& v : vocab_) w.put_string(v);
    dist_.save(w);
  }

  static CategoricalColumnModel load(ByteReader& r) {
    CategoricalColumnModel m;
    m.has_escape_ = r.get<u8>() != 0;
    u32 n = r.get<u32>();
    for (u32 i = 0; i < n; ++i) {
      m.vocab_.push_back(r.get_string());
      m.index_[m.vocab_.back()] = i;
    }
    m.dist_ = CategoricalModel::load(r);
    if (m.dist_.slot_count() != n + (m.has_escape_ ? 1 : 0))
      raise(Errc::CorruptStream, "categorical model does not match vocabulary");
    return m;
  }

 private:
  // Keeps the most frequent values, folding the tail into the escape slot.
  void shrink_vocab(std::vector<u64>& counts, size_t cap) {
    std::vector<u32> order(vocab_.size());
    for (u32 i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](u32 a, u32 b) {
      if (counts[a] != counts[b]) return counts[a] > counts[b];
      return a < b;
    });
    order.resize(cap);
    std::sort(order.begin(), order.end());  // keep first-appearance order
    std::vector<std::string> vocab;
    std::vector<u64> kept;
    index_.clear();
    for (u32 old : order) {
      index_[vocab_[old]] = static_cast<u32>(vocab.size());
      vocab.push_back(std::move(vocab_[old]));
      kept.push_back(counts[old]);
    }
    vocab_ = std::move(vocab);
    counts = std::move(kept);
  }

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, u32> index_;
  CategoricalModel dist_;
  bool has_escape_ = false;
};

// One column's model of a given kind.
class ColumnModel {
 public:
  ColumnModel() = default;
  explicit ColumnModel(CategoricalColumnModel m) : impl_(std::move(m)) {}
  explicit ColumnModel(NumericModel m) : impl_(std::move(m)) {}
  explicit ColumnModel(StringModel m) : impl_(std::move(m)) {}

  const CategoricalColumnModel& categorical() const { return std::get<CategoricalColumnModel>(impl_); }
  const NumericModel& numeric() const { return std::get<NumericModel>(impl_); }
  const StringModel& string() const { return std::get<StringModel>(impl_); }
  bool is_categorical() const { return impl_.index() == 0; }
  bool is_numeric() const { return impl_.index() == 1; }
  bool is_string() const { return impl_.index() == 2; }

  template <class Sink>
  void encode(Sink& sink, const Value& v, StringState* state) const {
    switch (impl_.index()) {
      case 0: categorical().encode(sink, std::get<std::string>(v)); break;
      case 1:
        if (numeric().kind() == NumericModel::Kind::Integer) {
          numeric().encode(sink, std::get<i64>(v));
        } else {
          numeric().encode(sink, std::get<double>(v));
        }
        break;
      case 2: string().encode(sink, std::get<std::string>(v), *state); break;
    }
  }

  template <class Source>
  Value decode(Source& src, StringState* state) const {
    switch (impl_.index()) {
      case 0: return categorical().decode(src);
      case 1:
        if (numeric().kind() == NumericModel::Kind::Integer) return numeric().decode_int(src);
        return numeric().decode_double(src);
      case 2: return string().decode(src, *state);
    }
    raise(Errc::CorruptStream, "empty column model");
  }

  void save(ByteWriter& w) const {
    w.put<u8>(static_cast<u8>(impl_.index()));
    switch (impl_.index()) {
      case 0: categorical().save(w); break;
      case 1: numeric().save(w); break;
      case 2: string().save(w); break;
    }
  }

  static ColumnModel load(ByteReader& r) {
    switch (r.get<u8>()) {
      case 0: return ColumnModel(CategoricalColumnModel::load(r));
      case 1: return ColumnModel(NumericModel::load(r));
      case 2: return ColumnModel(StringModel::load(r));
      default: raise(Errc::CorruptStream, "bad column model tag");
    }
  }

 private:
  std::variant<CategoricalColumnModel, NumericModel, StringModel> impl_;
};

// Per-column coder: a marginal model plus, when the column has a learned
// parent, one model per well-supported parent value. Unseen or thinly
// supported parent values fall back to the marginal model.
struct ColumnCoder {
  i32 parent = -1;  // schema index of the parent column, -1 for none
  ColumnModel marginal;
  std::map<u32, ColumnModel> conditional;  // keyed by parent vocabulary slot

  const ColumnModel& select(std::optional<u32> parent_slot) const {
    if (parent >= 0 && parent_slot) {
      auto it = conditional.find(*parent_slot);
      if (it != conditional.end()) return it->second;
    }
    return marginal;
  }

  void save(ByteWriter& w) const {
    w.put<i32>(parent);
    marginal.save(w);
    w.put<u32>(static_cast<u32>(conditional.size()));
    for (const auto& [key, model] : conditional) {
      w.put<u32>(key);
      model.save(w);
    }
  }

  static ColumnCoder load(ByteReader& r) {
    ColumnCoder c;
    c.parent = r.get<i32>();
    c.marginal = ColumnModel::load(r);
    u32 n = r.get<u32>();
    for (u32 i = 0; i < n; ++i) {
      u32 key = r.get<u32>();
      c.conditional.emplace(key, ColumnModel::load(r));
    }
    return c;
  }
};

// Everything needed to turn tuples into interval streams and back: the
// learned column ordering and one coder per column.
struct TableModels {
  std::vector<u32> ordering;       // encode order over schema indices
  std::vector<ColumnCoder> coders;  // schema order

  void save(ByteWriter& w) const {
    w.put<u32>(static_cast<u32>(ordering.size()));
    for (u32 c : ordering) w.put<u32>(c);
    for (const ColumnCoder& c : coders) c.save(w);
  }

  static TableModels load(ByteReader& r) {
    TableModels m;
    u32 n = r.get<u32>();
    for (u32 i = 0; i < n; ++i) m.ordering.push_back(r.get<u32>());
    for (u32 i = 0; i < n; ++i) m.coders.push_back(ColumnCoder::load(r));
    for (u32 c : m.ordering)
      if (c >= n) raise(Errc::CorruptStream, "bad column ordering");
    return m;
  }
};

// Streams tuples through a codec. Holds the per-block mutable string states;
// reset() must be called at every block boundary on both sides.
class TupleCodec {
 public:
  TupleCodec(const TableSchema& schema, const TableModels& models)
      : schema_(schema), models_(models), string_states_(schema.column_count()) {}

  void reset() {
    for (StringState& s : string_states_) s.reset();
  }

  template <class Sink>
  void encode_tuple(Sink& sink, const Tuple& t) {
    for (u32 col : models_.ordering) {
      const ColumnCoder& coder = models_.coders[col];
      const ColumnModel& model = coder.select(parent_slot(coder, t));
      model.encode(sink, t[col], &string_states_[col]);
    }
  }

  template <class Source>
  Tuple decode_tuple(Source& src) {
    Tuple t(schema_.column_count());
    for (u32 col : models_.ordering) {
      const ColumnCoder& coder = models_.coders[col];
      const ColumnModel& model = coder.select(parent_slot(coder, t));
      t[col] = model.decode(src, &string_states_[col]);
    }
    return t;
  }

 private:
  std::optional<u32> parent_slot(const ColumnCoder& coder, const Tuple& t) const {
    if (coder.parent < 0) return std::nullopt;
    const ColumnCoder& pc = models_.coders[coder.parent];
    return pc.marginal.categorical().slot_of(std::get<std::string>(t[coder.parent]));
  }

  const TableSchema& schema_;
  const TableModels& models_;
  std::vector<StringState> string_states_;
};

}  // namespace blitz
