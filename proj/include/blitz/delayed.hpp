#pragma once

#include <span>
#include <variant>
#include <vector>

#include "blitz/categorical.hpp"
#include "blitz/interval.hpp"

namespace blitz {

struct CodecConfig {
  u64 lambda = u64{1} << kProbBits;  // option count at which intervals turn virtual
  u32 tuples_per_block = 1;          // 0 = everything in one block (archive)

  void validate() const {
    if (lambda < kProbScale || (lambda & (lambda - 1)) != 0 || lambda > (u64{1} << 32))
      raise(Errc::BadPrecision, "lambda must be a power of two in [2^16, 2^32]");
  }
};

// Mixed-radix digit extraction: x is decomposed into digits a_1..a_n with
// digit i running modulo bases[i], least-significant digit last.
inline std::vector<u32> radix_decompose(u64 x, std::span<const u32> bases) {
  std::vector<u32> digits(bases.size());
  for (size_t i = bases.size(); i-- > 0;) {
    if (bases[i] == 0) raise(Errc::CapacityError, "zero base");
    digits[i] = static_cast<u32>(x % bases[i]);
    x /= bases[i];
  }
  if (x != 0) raise(Errc::CapacityError, "bases cannot represent the value");
  return digits;
}

struct EncodeStats {
  std::vector<bool> marked;   // which intervals were carried virtually
  u64 leftover_options = 1;   // option counter left after the block
  size_t codes_emitted = 0;
};

// Delayed-coding block encoder. Every selected interval becomes one 16-bit
// code, but a code whose interval has k options can absorb a base-k digit of
// later codes; once the accumulated option count reaches lambda, the next
// interval's code is carried entirely by those options and never emitted.
//
// Encoding is two-pass over a buffered block: a forward planning pass marks
// the virtual intervals, then a backward filling pass distributes digits and
// emits the surviving codes in stream order.
class DelayedEncoder {
 public:
  explicit DelayedEncoder(u64 lambda = u64{1} << kProbBits) : lambda_(lambda) {}

  void put_set(const CategoricalModel& model, u32 slot) {
    const IntervalSet& s = model.intervals(slot);
    if (s.width() == 0) raise(Errc::UnknownSymbol, "slot has no code space");
    items_.push_back(Item{&s, Interval{}});
  }

  void put_interval_set(const IntervalSet& s) {
    if (s.width() == 0) raise(Errc::UnknownSymbol, "empty interval set");
    items_.push_back(Item{&s, Interval{}});
  }

  void put_uniform(u32 bits, u32 value) {
    items_.push_back(Item{nullptr, uniform_interval(bits, value)});
  }

  size_t pending() const { return items_.size(); }

  // Encodes the buffered block, appending big-endian 16-bit codes to out.
  EncodeStats flush(std::vector<u8>& out) {
    size_t n = items_.size();
    EncodeStats stats;
    stats.marked.assign(n, false);

    u64 counter = 1;
    bool mark_next = false;
    for (size_t i = 0; i < n; ++i) {
      stats.marked[i] = mark_next;
      mark_next = false;
      counter *= items_[i].width();
      if (counter >= lambda_) {
        mark_next = true;
        counter >>= kProbBits;
      }
    }
    stats.leftover_options = counter;

    std::vector<Code16> reversed;
    reversed.reserve(n);
    u64 data = 0;
    for (size_t i = n; i-- > 0;) {
      u32 k = items_[i].width();
      u32 a = static_cast<u32>(data % k);
      data /= k;
      Code16 c = items_[i].code_at(a);
      if (stats.marked[i]) {
        data = (data << kProbBits) | c;
      } else {
        reversed.push_back(c);
      }
    }
    assert(data == 0);

    stats.codes_emitted = reversed.size();
    for (size_t i = reversed.size(); i-- > 0;) {
      out.push_back(static_cast<u8>(reversed[i] >> 8));
      out.push_back(static_cast<u8>(reversed[i] & 0xff));
    }
    items_.clear();
    return stats;
  }

 private:
  struct Item {
    const IntervalSet* set;  // null for an inline single interval
    Interval single;

    u32 width() const { return set ? set->width() : single.width(); }
    Code16 code_at(u32 rank) const {
      if (set) return set->code_at(rank);
      return static_cast<Code16>(single.lo + rank);
    }
  };

  u64 lambda_;
  std::vector<Item> items_;
};

// Pull decoder over one block. Codes come from the stream until the virtual
// option count reaches lambda, at which point the next code is peeled off the
// accumulator instead.
class DelayedDecoder {
 public:
  DelayedDecoder(std::span<const u8> block, u64 lambda = u64{1} << kProbBits)
      : block_(block), lambda_(lambda) {}

  Code16 next_code() {
    if (v_size_ >= lambda_) {
      Code16 c = static_cast<Code16>(v_info_ & 0xffff);
      v_info_ >>= kProbBits;
      v_size_ >>= kProbBits;
      ++virtual_pops_;
      return c;
    }
    if (pos_ + 2 > block_.size()) raise(Errc::CorruptStream, "compressed block exhausted");
    Code16 c = static_cast<Code16>((static_cast<u32>(block_[pos_]) << 8) | block_[pos_ + 1]);
    pos_ += 2;
    return c;
  }

  void consume(u32 rank, u32 width) {
    v_info_ = v_info_ * width + rank;
    v_size_ *= width;
  }

  u32 get_slot(const CategoricalModel& model) {
    Code16 c = next_code();
    CategoricalModel::Hit h = model.inv_translate(c);
    consume(h.rank, h.width);
    return h.slot;
  }

  u32 get_uniform(u32 bits) {
    Code16 c = next_code();
    u32 v = static_cast<u32>(c) >> (kProbBits - bits);
    consume(c & ((kProbScale >> bits) - 1), kProbScale >> bits);
    return v;
  }

  u64 v_info() const { return v_info_; }
  u64 v_size() const { return v_size_; }
  u64 virtual_pops() const { return virtual_pops_; }
  size_t consumed_bytes() const { return pos_; }

 private:
  std::span<const u8> block_;
  size_t pos_ = 0;
  u64 lambda_;
  u64 v_info_ = 0;
  u64 v_size_ = 1;
  u64 virtual_pops_ = 0;
};

}  // namespace blitz
