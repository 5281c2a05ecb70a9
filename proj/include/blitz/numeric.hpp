#pragma once

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <span>

#include "blitz/categorical.hpp"

namespace blitz {

// Two-level quantizer for numeric columns. The value range is cut into a
// p-spaced grid of "units"; whole buckets of units get frequency-weighted
// intervals (first level) and the unit's offset inside its bucket is sent as
// an equi-width segment index (second level). Values that fall off the grid,
// land in an empty bucket, or cannot be certified to reconstruct within p go
// through a pinned outlier slot followed by their raw 64 bits.
class NumericModel {
 public:
  enum class Kind : u8 { Integer, Floating };

  struct Decomp {
    u32 bucket;
    u128 segment;
  };

  NumericModel() = default;

  static NumericModel fit_integers(std::span<const i64> values, u32 bucket_target = 512) {
    if (values.empty()) raise(Errc::EmptyColumn, "no values to fit");
    if (bucket_target == 0) bucket_target = 1;
    NumericModel m;
    m.kind_ = Kind::Integer;
    m.precision_ = 1.0;
    i64 lo = values[0], hi = values[0];
    for (i64 v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    m.imin_ = lo;
    m.total_units_ = static_cast<u128>(static_cast<u64>(hi) - static_cast<u64>(lo)) + 1;
    m.finish_grid(bucket_target);
    std::vector<u64> counts(m.bucket_count_ + 1, 0);
    for (i64 v : values) {
      auto d = m.decompose(v);
      ++counts[d ? d->bucket : m.outlier_slot()];
    }
    m.bucket_model_ = CategoricalModel::fit(counts, {.pinned_tail = 1});
    return m;
  }

  // precision <= 0 selects the 64-bit default.
  static NumericModel fit_doubles(std::span<const double> values, double precision = 0,
                                  u32 bucket_target = 512) {
    if (values.empty()) raise(Errc::EmptyColumn, "no values to fit");
    if (bucket_target == 0) bucket_target = 1;
    if (precision < 0) raise(Errc::BadPrecision, "precision must be positive");
    if (precision == 0) precision = kDoublePrecisionDefault;
    NumericModel m;
    m.kind_ = Kind::Floating;
    m.precision_ = precision;
    bool any = false;
    double lo = 0, hi = 0;
    for (double v : values) {
      if (!std::isfinite(v)) continue;
      if (!any) {
        lo = hi = v;
        any = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!any) raise(Errc::NonFiniteValue, "no finite value to fit");
    m.fmin_ = lo;
    long double units = (static_cast<long double>(hi) - static_cast<long double>(lo)) /
                        static_cast<long double>(precision);
    if (!(units >= 0) || units > 1e30L) raise(Errc::BadPrecision, "precision too fine for value range");
    m.total_units_ = static_cast<u128>(floorl(units)) + 1;
    m.finish_grid(bucket_target);
    std::vector<u64> counts(m.bucket_count_ + 1, 0);
    for (double v : values) {
      if (!std::isfinite(v)) {
        ++counts[m.outlier_slot()];
        continue;
      }
      auto d = m.decompose(v);
      ++counts[d ? d->bucket : m.outlier_slot()];
    }
    m.bucket_model_ = CategoricalModel::fit(counts, {.pinned_tail = 1});
    return m;
  }

  Kind kind() const { return kind_; }
  double precision() const { return precision_; }
  u32 bucket_count() const { return bucket_count_; }
  u32 outlier_slot() const { return bucket_count_; }
  u128 units_per_bucket() const { return units_per_bucket_; }
  u32 segment_bits() const { return segment_bits_; }
  const CategoricalModel& bucket_model() const { return bucket_model_; }

  // Grid decomposition; nullopt means the value must take the outlier path.
  std::optional<Decomp> decompose(i64 v) const {
    assert(kind_ == Kind::Integer);
    if (v < imin_) return std::nullopt;
    u128 unit = static_cast<u64>(v) - static_cast<u64>(imin_);
    if (unit >= total_units_) return std::nullopt;
    return Decomp{static_cast<u32>(unit / units_per_bucket_), unit % units_per_bucket_};
  }

  std::optional<Decomp> decompose(double v) const {
    assert(kind_ == Kind::Floating);
    if (std::isnan(v)) raise(Errc::NonFiniteValue, "cannot place NaN on the grid");
    if (!std::isfinite(v) || v < fmin_) return std::nullopt;
    long double off = (static_cast<long double>(v) - static_cast<long double>(fmin_)) /
                      static_cast<long double>(precision_);
    if (off > 1e30L) return std::nullopt;
    u128 guess = static_cast<u128>(off < 0 ? 0.0L : off);
    // Certify grid-edge recovery: pick the unit whose reconstruction is the
    // closest double at or below v and still within p.
    for (int step = 1; step >= -1; --step) {
      if (step > 0 && guess + step >= total_units_) continue;
      if (step < 0 && guess == 0) continue;
      u128 unit = guess + step;
      if (unit >= total_units_) continue;
      double rec = reconstruct_double_unit(unit);
      if (rec <= v && v - rec < precision_) {
        return Decomp{static_cast<u32>(unit / units_per_bucket_), unit % units_per_bucket_};
      }
    }
    return std::nullopt;
  }

  i64 reconstruct_int(u32 bucket, u128 segment) const {
    assert(kind_ == Kind::Integer);
    u128 unit = static_cast<u128>(bucket) * units_per_bucket_ + segment;
    return static_cast<i64>(static_cast<u64>(imin_) + static_cast<u64>(unit));
  }

  double reconstruct_double(u32 bucket, u128 segment) const {
    assert(kind_ == Kind::Floating);
    return reconstruct_double_unit(static_cast<u128>(bucket) * units_per_bucket_ + segment);
  }

  // --- streaming grammar -----------------------------------------------

  template <class Sink>
  void encode(Sink& sink, i64 v) const {
    auto d = routed(decompose(v));
    if (!d) {
      emit_outlier(sink, static_cast<u64>(v));
      return;
    }
    sink.put_set(bucket_model_, d->bucket);
    emit_segment(sink, d->segment);
  }

  template <class Sink>
  void encode(Sink& sink, double v) const {
    auto d = routed(decompose(v));
    if (!d) {
      emit_outlier(sink, std::bit_cast<u64>(v));
      return;
    }
    sink.put_set(bucket_model_, d->bucket);
    emit_segment(sink, d->segment);
  }

  template <class Source>
  i64 decode_int(Source& src) const {
    u32 slot = src.get_slot(bucket_model_);
    if (slot == outlier_slot()) return static_cast<i64>(read_outlier(src));
    return reconstruct_int(slot, read_segment(src));
  }

  template <class Source>
  double decode_double(Source& src) const {
    u32 slot = src.get_slot(bucket_model_);
    if (slot == outlier_slot()) return std::bit_cast<double>(read_outlier(src));
    return reconstruct_double(slot, read_segment(src));
  }

  void save(ByteWriter& w) const {
    w.put<u8>(static_cast<u8>(kind_));
    w.put<i64>(imin_);
    w.put<double>(fmin_);
    w.put<double>(precision_);
    w.put_u128(total_units_);
    w.put_u128(units_per_bucket_);
    w.put<u32>(bucket_count_);
    w.put<u32>(segment_bits_);
    bucket_model_.save(w);
  }

  static NumericModel load(ByteReader& r) {
    NumericModel m;
    m.kind_ = static_cast<Kind>(r.get<u8>());
    m.imin_ = r.get<i64>();
    m.fmin_ = r.get<double>();
    m.precision_ = r.get<double>();
    m.total_units_ = r.get_u128();
    m.units_per_bucket_ = r.get_u128();
    m.bucket_count_ = r.get<u32>();
    m.segment_bits_ = r.get<u32>();
    m.bucket_model_ = CategoricalModel::load(r);
    if (m.units_per_bucket_ == 0 || m.bucket_count_ == 0 ||
        m.bucket_model_.slot_count() != m.bucket_count_ + 1)
      raise(Errc::CorruptStream, "bad numeric model");
    return m;
  }

 private:
  void finish_grid(u32 bucket_target) {
    units_per_bucket_ = (total_units_ + bucket_target - 1) / bucket_target;
    if (units_per_bucket_ == 0) units_per_bucket_ = 1;
    bucket_count_ = static_cast<u32>((total_units_ + units_per_bucket_ - 1) / units_per_bucket_);
    segment_bits_ = 0;
    while ((static_cast<u128>(1) << segment_bits_) < units_per_bucket_) ++segment_bits_;
  }

  double reconstruct_double_unit(u128 unit) const {
    return static_cast<double>(static_cast<long double>(fmin_) +
                               static_cast<long double>(unit) *
                                   static_cast<long double>(precision_));
  }

  // Empty buckets keep width zero, so anything landing there is an outlier.
  std::optional<Decomp> routed(std::optional<Decomp> d) const {
    if (d && bucket_model_.width(d->bucket) == 0) return std::nullopt;
    return d;
  }

  template <class Sink>
  void emit_outlier(Sink& sink, u64 bits) const {
    sink.put_set(bucket_model_, outlier_slot());
    for (int s = 48; s >= 0; s -= 16) sink.put_uniform(16, static_cast<u32>(bits >> s) & 0xffff);
  }

  template <class Sink>
  void emit_segment(Sink& sink, u128 j) const {
    u32 g = segment_bits_;
    if (g == 0) return;
    u32 top = ((g - 1) % 16) + 1;
    u32 pos = g - top;
    sink.put_uniform(top, static_cast<u32>(j >> pos) & ((1u << top) - 1));
    while (pos > 0) {
      pos -= 16;
      sink.put_uniform(16, static_cast<u32>(j >> pos) & 0xffff);
    }
  }

  template <class Source>
  u64 read_outlier(Source& src) const {
    u64 bits = 0;
    for (int c = 0; c < 4; ++c) bits = (bits << 16) | src.get_uniform(16);
    return bits;
  }

  template <class Source>
  u128 read_segment(Source& src) const {
    u32 g = segment_bits_;
    if (g == 0) return 0;
    u32 top = ((g - 1) % 16) + 1;
    u128 j = src.get_uniform(top);
    for (u32 pos = g - top; pos > 0; pos -= 16) j = (j << 16) | src.get_uniform(16);
    return j;
  }

  Kind kind_ = Kind::Integer;
  i64 imin_ = 0;
  double fmin_ = 0;
  double precision_ = 1.0;
  u128 total_units_ = 1;
  u128 units_per_bucket_ = 1;
  u32 bucket_count_ = 1;
  u32 segment_bits_ = 0;
  CategoricalModel bucket_model_;
};

}  // namespace blitz
