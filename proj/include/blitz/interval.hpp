#pragma once

#include <algorithm>
#include <cassert>
#include <optional>
#include <vector>

#include "blitz/error.hpp"
#include "blitz/types.hpp"

namespace blitz {

// Integer probability interval [lo, hi) on the 2^16 grid, denoting
// [lo/2^16, hi/2^16). Bounds live in 32-bit words so hi == 2^16 needs
// no sentinel. Invariant: 0 <= lo < hi <= 2^16.
struct Interval {
  u32 lo = 0;
  u32 hi = 0;

  constexpr u32 width() const { return hi - lo; }
  constexpr bool valid() const { return lo < hi && hi <= kProbScale; }
  constexpr bool contains(u32 code) const { return code >= lo && code < hi; }
  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

inline constexpr Interval kFullInterval{0, kProbScale};

// Makes the equi-width interval for choosing `value` out of 2^bits options.
constexpr Interval uniform_interval(u32 bits, u32 value) {
  assert(bits <= kProbBits && value < (1u << bits));
  u32 w = kProbScale >> bits;
  return Interval{value * w, (value + 1) * w};
}

// An ordered union of disjoint intervals. A symbol whose codes were scattered
// across alias buckets ends up with one of these; adjacent pieces are
// coalesced at construction so equal sets compare equal.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(Interval piece) : pieces_{piece}, width_(piece.width()) {}

  static IntervalSet single(u32 lo, u32 hi) { return IntervalSet(Interval{lo, hi}); }

  // Pieces must be appended in increasing code order and must not overlap.
  void append(Interval piece) {
    assert(piece.valid());
    if (!pieces_.empty()) {
      assert(pieces_.back().hi <= piece.lo);
      if (pieces_.back().hi == piece.lo) {
        pieces_.back().hi = piece.hi;
        width_ += piece.width();
        return;
      }
    }
    pieces_.push_back(piece);
    width_ += piece.width();
  }

  u32 width() const { return width_; }
  bool empty() const { return pieces_.empty(); }
  const std::vector<Interval>& pieces() const { return pieces_; }

  bool contains(u32 code) const {
    for (const Interval& p : pieces_) {
      if (code < p.lo) return false;
      if (code < p.hi) return true;
    }
    return false;
  }

  // The a-th admissible code of the set, counting pieces left to right.
  Code16 code_at(u32 rank) const {
    for (const Interval& p : pieces_) {
      if (rank < p.width()) return static_cast<Code16>(p.lo + rank);
      rank -= p.width();
    }
    raise(Errc::RankOutOfRange, "interval set rank out of range");
  }

  // Inverse of code_at: the rank of `code` within the set.
  u32 rank_of(u32 code) const {
    u32 acc = 0;
    for (const Interval& p : pieces_) {
      if (code < p.lo) break;
      if (code < p.hi) return acc + (code - p.lo);
      acc += p.width();
    }
    raise(Errc::RankOutOfRange, "code not in interval set");
  }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval> pieces_;
  u32 width_ = 0;
};

struct ProductResult {
  std::optional<Code16> emitted;
  Interval result;
};

// Narrows `outer` by `inner` in exact 32-bit arithmetic. While the inward
// 16-bit rounding of the product keeps a width of >= 2 nothing is emitted;
// otherwise 16 determined bits leave early and the window is rebased onto
// the longest piece of the product not crossing a 2^16 boundary. Rounding
// the carried window inward keeps it nested inside the exact product, which
// is what makes decoding by exact boundaries unambiguous.
inline ProductResult interval_product(Interval outer, Interval inner) {
  assert(outer.valid() && inner.valid());
  u64 range = outer.width();
  u64 base = static_cast<u64>(outer.lo) << kProbBits;
  u64 lo32 = base + range * inner.lo;
  u64 hi32 = base + range * inner.hi;
  u32 lo16 = static_cast<u32>((lo32 + kProbScale - 1) >> kProbBits);  // ceil
  u32 hi16 = static_cast<u32>(hi32 >> kProbBits);                     // floor

  if (hi16 >= lo16 + 2) {
    return {std::nullopt, Interval{lo16, hi16}};
  }
  // The window collapsed: cut [lo32, hi32) at the interior 2^16 boundaries
  // (at most two) and keep the longest piece, ties to the lowest.
  u64 best_lo = 0, best_len = 0;
  u64 at = lo32;
  while (at < hi32) {
    u64 cell_end = (at >> kProbBits << kProbBits) + kProbScale;
    u64 piece_end = std::min(hi32, cell_end);
    if (piece_end - at > best_len) {
      best_len = piece_end - at;
      best_lo = at;
    }
    at = piece_end;
  }
  u32 emitted = static_cast<u32>(best_lo >> kProbBits);
  u32 rebased = static_cast<u32>(best_lo & 0xffff);
  return {static_cast<Code16>(emitted),
          Interval{rebased, rebased + static_cast<u32>(best_len)}};
}

}  // namespace blitz
