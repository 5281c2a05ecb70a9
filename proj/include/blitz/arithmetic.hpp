#pragma once

#include <span>
#include <vector>

#include "blitz/categorical.hpp"
#include "blitz/interval.hpp"

namespace blitz {

namespace detail {

// MSB-first bit buffer.
class BitWriter {
 public:
  void put(u32 value, u32 nbits) {
    for (u32 i = nbits; i-- > 0;) {
      if (fill_ == 0) bytes_.push_back(0);
      bytes_.back() = static_cast<u8>(bytes_.back() | (((value >> i) & 1) << (7 - fill_)));
      fill_ = (fill_ + 1) & 7;
    }
  }
  const std::vector<u8>& bytes() const { return bytes_; }
  void move_into(std::vector<u8>& out) {
    out.insert(out.end(), bytes_.begin(), bytes_.end());
    bytes_.clear();
    fill_ = 0;
  }

 private:
  std::vector<u8> bytes_;
  u32 fill_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const u8> data) : data_(data) {}

  // Reads past the end as zeros; arithmetic termination relies on this.
  u32 get(u32 nbits) {
    u32 v = 0;
    for (u32 i = 0; i < nbits; ++i) {
      u32 byte = bit_ >> 3;
      u32 b = byte < data_.size() ? (data_[byte] >> (7 - (bit_ & 7))) & 1 : 0;
      v = (v << 1) | b;
      ++bit_;
    }
    return v;
  }

 private:
  std::span<const u8> data_;
  size_t bit_ = 0;
};

}  // namespace detail

// Arithmetic coder over the same integer interval grid, kept as the
// entropy-coding baseline. The encoder folds interval products, emitting 16
// determined bits whenever the window collapses; termination writes the
// shortest dyadic interval contained in the final window.
class ArithmeticEncoder {
 public:
  void put_interval(Interval inner) {
    assert(inner.valid());
    ProductResult r = interval_product(window_, inner);
    if (r.emitted) bits_.put(*r.emitted, kProbBits);
    window_ = r.result;
  }

  void put_set(const CategoricalModel& model, u32 slot) {
    Interval iv = model.cdf_interval(slot);
    if (iv.width() == 0) raise(Errc::UnknownSymbol, "slot has no code space");
    put_interval(iv);
  }

  void put_uniform(u32 bits, u32 value) { put_interval(uniform_interval(bits, value)); }

  // Terminates the stream and appends the whole byte-aligned payload to out.
  void finish(std::vector<u8>& out) {
    for (u32 k = 0; k <= kProbBits; ++k) {
      u32 shift = kProbBits - k;
      u32 m = (window_.lo + (1u << shift) - 1) >> shift;  // ceil
      if (static_cast<u64>(m + 1) << shift <= window_.hi) {
        bits_.put(m, k);
        break;
      }
    }
    bits_.move_into(out);
    window_ = kFullInterval;
  }

 private:
  Interval window_ = kFullInterval;
  detail::BitWriter bits_;
};

class ArithmeticDecoder {
 public:
  explicit ArithmeticDecoder(std::span<const u8> data) : bits_(data) {
    value_ = (static_cast<u64>(bits_.get(16)) << 16) | bits_.get(16);
  }

  u32 get_slot(const CategoricalModel& model) {
    u32 slot = model.cdf_locate(offset());
    apply(model.cdf_interval(slot));
    return slot;
  }

  u32 get_uniform(u32 bits) {
    u32 v = offset() >> (kProbBits - bits);
    apply(uniform_interval(bits, v));
    return v;
  }

 private:
  // Position of the code value on the model's 2^16 grid within the window.
  u32 offset() const {
    u64 base = static_cast<u64>(window_.lo) << kProbBits;
    u64 top = static_cast<u64>(window_.hi) << kProbBits;
    if (value_ < base || value_ >= top) raise(Errc::CorruptStream, "code value left the window");
    return static_cast<u32>((value_ - base) / window_.width());
  }

  void apply(Interval inner) {
    ProductResult r = interval_product(window_, inner);
    window_ = r.result;
    if (r.emitted) {
      value_ = ((value_ - (static_cast<u64>(*r.emitted) << kProbBits)) << kProbBits) |
               bits_.get(16);
    }
  }

  detail::BitReader bits_;
  u64 value_ = 0;
  Interval window_ = kFullInterval;
};

}  // namespace blitz
