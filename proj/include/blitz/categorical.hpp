#pragma once

#include <algorithm>
#include <cassert>
#include <numeric>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "blitz/interval.hpp"
#include "blitz/serialize.hpp"

namespace blitz {

// Discrete distribution over dense slot ids 0..n-1, quantized onto the 2^16
// grid. Callers own the mapping from actual values to slots.
//
// The model keeps two views of the same quantized widths:
//  - a contiguous CDF layout, used by the arithmetic-coding baseline;
//  - an alias-bucket layout giving constant-time code-to-slot lookup, used by
//    the delayed codec. A slot's codes under this layout may form a union of
//    disjoint ranges, which is what IntervalSet models.
struct CatFitOptions {
  // Trailing slots that must stay encodable (width >= 1) even when their
  // count is zero, e.g. an escape or outlier slot.
  size_t pinned_tail = 0;
  bool pin_all = false;
};

class CategoricalModel {
 public:
  using FitOptions = CatFitOptions;

  struct Hit {
    u32 slot;
    u32 rank;   // rank of the code within the slot's interval set
    u32 width;  // total width of the slot (its option count)
  };

  CategoricalModel() = default;

  static CategoricalModel fit(std::span<const u64> counts, FitOptions opts = {}) {
    CategoricalModel m;
    m.freq16_ = quantize(counts, opts);
    m.build_cum();
    m.build_alias();
    return m;
  }

  // Builds a model from an explicit per-slot partition of [0, 2^16). Lookup
  // uses a dense code table instead of alias buckets.
  static CategoricalModel from_intervals(std::vector<IntervalSet> sets) {
    CategoricalModel m;
    m.sets_ = std::move(sets);
    m.dense_.assign(kProbScale, kNoSlot);
    m.freq16_.resize(m.sets_.size());
    u32 covered = 0;
    for (u32 slot = 0; slot < m.sets_.size(); ++slot) {
      m.freq16_[slot] = m.sets_[slot].width();
      covered += m.sets_[slot].width();
      for (const Interval& p : m.sets_[slot].pieces()) {
        for (u32 c = p.lo; c < p.hi; ++c) {
          if (m.dense_[c] != kNoSlot) raise(Errc::CapacityError, "overlapping interval sets");
          m.dense_[c] = slot;
        }
      }
    }
    if (covered != kProbScale) raise(Errc::CapacityError, "interval sets do not cover [0, 2^16)");
    m.build_cum();
    return m;
  }

  u32 slot_count() const { return static_cast<u32>(freq16_.size()); }
  u32 width(u32 slot) const { return freq16_[slot]; }
  const std::vector<u32>& widths() const { return freq16_; }

  const IntervalSet& intervals(u32 slot) const { return sets_[slot]; }

  Hit inv_translate(Code16 code) const {
    if (!dense_.empty()) {
      u32 slot = dense_[code];
      return Hit{slot, sets_[slot].rank_of(code), freq16_[slot]};
    }
    const Bucket& b = buckets_[code >> (kProbBits - bucket_bits_)];
    u32 q = code & (bucket_width() - 1);
    if (q < b.split) {
      return Hit{b.lo_slot, static_cast<u32>(code + b.lo_bias), freq16_[b.lo_slot]};
    }
    return Hit{b.hi_slot, static_cast<u32>(code + b.hi_bias), freq16_[b.hi_slot]};
  }

  // Contiguous view for arithmetic coding: slot i covers [cum[i], cum[i+1]).
  Interval cdf_interval(u32 slot) const { return Interval{cum_[slot], cum_[slot + 1]}; }

  // Last slot whose cumulative start is <= t; zero-width slots are skipped.
  u32 cdf_locate(u32 t) const {
    assert(t < kProbScale);
    auto it = std::upper_bound(cum_.begin(), cum_.end(), t);
    return static_cast<u32>(it - cum_.begin()) - 1;
  }

  u32 bucket_bits() const { return bucket_bits_; }
  u32 bucket_width() const { return kProbScale >> bucket_bits_; }

  void save(ByteWriter& w) const {
    w.put<u8>(dense_.empty() ? 0 : 1);
    w.put<u32>(slot_count());
    for (u32 f : freq16_) w.put<u32>(f);
    if (dense_.empty()) {
      w.put<u8>(static_cast<u8>(bucket_bits_));
      for (const Bucket& b : buckets_) {
        w.put<u32>(b.split);
        w.put<u32>(b.lo_slot);
        w.put<u32>(b.hi_slot);
      }
    } else {
      for (const IntervalSet& s : sets_) {
        w.put<u32>(static_cast<u32>(s.pieces().size()));
        for (const Interval& p : s.pieces()) {
          w.put<u32>(p.lo);
          w.put<u32>(p.hi);
        }
      }
    }
  }

  static CategoricalModel load(ByteReader& r) {
    u8 form = r.get<u8>();
    u32 n = r.get<u32>();
    if (n == 0 || n > kProbScale) raise(Errc::CorruptStream, "bad slot count");
    CategoricalModel m;
    m.freq16_.resize(n);
    u64 total = 0;
    for (u32 i = 0; i < n; ++i) {
      m.freq16_[i] = r.get<u32>();
      total += m.freq16_[i];
    }
    if (total != kProbScale) raise(Errc::CorruptStream, "slot widths do not sum to 2^16");
    m.build_cum();
    if (form == 0) {
      m.bucket_bits_ = r.get<u8>();
      if (m.bucket_bits_ > kProbBits) raise(Errc::CorruptStream, "bad bucket bits");
      u32 nbuckets = 1u << m.bucket_bits_;
      m.buckets_.resize(nbuckets);
      for (Bucket& b : m.buckets_) {
        b.split = r.get<u32>();
        b.lo_slot = r.get<u32>();
        b.hi_slot = r.get<u32>();
        if (b.split > m.bucket_width() || b.lo_slot >= n || b.hi_slot >= n)
          raise(Errc::CorruptStream, "bad alias bucket");
      }
      m.finish_alias();
    } else {
      std::vector<IntervalSet> sets(n);
      for (u32 i = 0; i < n; ++i) {
        u32 pieces = r.get<u32>();
        for (u32 k = 0; k < pieces; ++k) {
          u32 lo = r.get<u32>();
          u32 hi = r.get<u32>();
          if (lo >= hi || hi > kProbScale) raise(Errc::CorruptStream, "bad interval piece");
          sets[i].append(Interval{lo, hi});
        }
      }
      return from_intervals(std::move(sets));
    }
    return m;
  }

  friend bool operator==(const CategoricalModel& a, const CategoricalModel& b) {
    return a.freq16_ == b.freq16_ && a.sets_ == b.sets_;
  }

 private:
  static constexpr u32 kNoSlot = 0xffffffffu;

  struct Bucket {
    u32 split = 0;  // codes [base, base+split) belong to lo_slot, the rest to hi_slot
    u32 lo_slot = 0;
    u32 hi_slot = 0;
    i32 lo_bias = 0;  // rank = code + bias, precomputed per side
    i32 hi_bias = 0;
  };

  // Largest-remainder quantization: every counted (or pinned) slot gets at
  // least width 1 and the widths sum to exactly 2^16.
  static std::vector<u32> quantize(std::span<const u64> counts, const FitOptions& opts) {
    size_t n = counts.size();
    if (n == 0) raise(Errc::EmptyColumn, "no slots to fit");
    if (n > kProbScale) raise(Errc::CapacityError, "more slots than codes");
    auto pinned = [&](size_t i) {
      return opts.pin_all || i + opts.pinned_tail >= n;
    };

    u64 total = std::accumulate(counts.begin(), counts.end(), u64{0});
    std::vector<u32> width(n, 0);
    std::vector<u64> rem(n, 0);
    size_t active = 0;
    u64 assigned = 0;
    for (size_t i = 0; i < n; ++i) {
      if (counts[i] == 0 && !pinned(i)) continue;
      ++active;
      u128 share = total ? static_cast<u128>(counts[i]) * kProbScale : 0;
      width[i] = total ? std::max<u32>(1, static_cast<u32>(share / total)) : 1;
      rem[i] = total ? static_cast<u64>(share % total) : 0;
      assigned += width[i];
    }
    if (active == 0) raise(Errc::EmptyColumn, "no observed or pinned slot");
    if (active > kProbScale) raise(Errc::CapacityError, "too many distinct values");

    if (assigned < kProbScale) {
      std::vector<u32> order;
      for (size_t i = 0; i < n; ++i)
        if (width[i] > 0) order.push_back(static_cast<u32>(i));
      std::sort(order.begin(), order.end(), [&](u32 a, u32 b) {
        return std::tie(rem[b], b) < std::tie(rem[a], a);
      });
      u64 deficit = kProbScale - assigned;
      for (size_t k = 0; deficit > 0; k = (k + 1) % order.size(), --deficit) {
        ++width[order[k]];
      }
    } else if (assigned > kProbScale) {
      // Minimum widths overshot; shave the widest slots first.
      std::set<std::tuple<u32, u64, u32>> by_width;  // (width, rem, slot), take largest
      for (size_t i = 0; i < n; ++i)
        if (width[i] > 1) by_width.insert({width[i], rem[i], static_cast<u32>(i)});
      u64 excess = assigned - kProbScale;
      while (excess > 0) {
        assert(!by_width.empty());
        auto [wd, rm, slot] = *by_width.rbegin();
        by_width.erase(std::prev(by_width.end()));
        --width[slot];
        --excess;
        if (width[slot] > 1) by_width.insert({width[slot], rm, slot});
      }
    }
    return width;
  }

  void build_cum() {
    cum_.resize(freq16_.size() + 1);
    cum_[0] = 0;
    for (size_t i = 0; i < freq16_.size(); ++i) cum_[i + 1] = cum_[i] + freq16_[i];
    assert(cum_.back() == kProbScale);
  }

  // Greedy pairing: each bucket holds at most two slots and spans exactly
  // 2^(16-m) codes. Repeatedly pair the narrowest remaining slot with the
  // widest one, returning the widest one's overflow to the pool. Buckets are
  // then canonically reordered so heavily contiguous layouts coalesce.
  void build_alias() {
    u32 items = 0;
    for (u32 f : freq16_)
      if (f > 0) ++items;
    bucket_bits_ = 0;
    while ((1u << bucket_bits_) < items) ++bucket_bits_;
    u32 nbuckets = 1u << bucket_bits_;
    u32 bwidth = bucket_width();

    std::set<std::pair<u32, u32>> small, large;  // (width, slot)
    for (u32 slot = 0; slot < freq16_.size(); ++slot) {
      if (freq16_[slot] == 0) continue;
      (freq16_[slot] < bwidth ? small : large).insert({freq16_[slot], slot});
    }

    buckets_.clear();
    buckets_.reserve(nbuckets);
    for (u32 j = 0; j < nbuckets; ++j) {
      Bucket b;
      if (!small.empty()) {
        assert(!large.empty());
        auto [ws, s] = *small.begin();
        small.erase(small.begin());
        auto [wl, l] = *std::prev(large.end());
        large.erase(std::prev(large.end()));
        b.split = ws;
        b.lo_slot = s;
        b.hi_slot = l;
        u32 left = wl - (bwidth - ws);
        if (left > 0) (left < bwidth ? small : large).insert({left, l});
      } else {
        auto [wl, l] = *std::prev(large.end());
        large.erase(std::prev(large.end()));
        b.split = bwidth;
        b.lo_slot = b.hi_slot = l;
        u32 left = wl - bwidth;
        if (left > 0) (left < bwidth ? small : large).insert({left, l});
      }
      // Canonical form: one slot per side ordered by slot id, pure buckets
      // expressed as a full lo side.
      if (b.lo_slot == b.hi_slot) {
        b.split = bwidth;
      } else if (b.lo_slot > b.hi_slot) {
        b.split = bwidth - b.split;
        std::swap(b.lo_slot, b.hi_slot);
      }
      buckets_.push_back(b);
    }
    assert(small.empty() && large.empty());
    std::sort(buckets_.begin(), buckets_.end(), [](const Bucket& a, const Bucket& b) {
      return std::tie(a.lo_slot, a.hi_slot, a.split) < std::tie(b.lo_slot, b.hi_slot, b.split);
    });
    finish_alias();
  }

  // Derives per-slot interval sets and per-bucket rank biases from the
  // bucket layout.
  void finish_alias() {
    u32 bwidth = bucket_width();
    sets_.assign(freq16_.size(), IntervalSet{});
    std::vector<u32> seen(freq16_.size(), 0);
    u64 covered = 0;
    for (u32 j = 0; j < buckets_.size(); ++j) {
      Bucket& b = buckets_[j];
      u32 base = j * bwidth;
      if (b.split > 0) {
        sets_[b.lo_slot].append(Interval{base, base + b.split});
        b.lo_bias = static_cast<i32>(seen[b.lo_slot]) - static_cast<i32>(base);
        seen[b.lo_slot] += b.split;
        covered += b.split;
      }
      if (b.split < bwidth) {
        sets_[b.hi_slot].append(Interval{base + b.split, base + bwidth});
        b.hi_bias = static_cast<i32>(seen[b.hi_slot]) - static_cast<i32>(base + b.split);
        seen[b.hi_slot] += bwidth - b.split;
        covered += bwidth - b.split;
      }
    }
    if (covered != kProbScale) raise(Errc::CorruptStream, "alias buckets do not cover the code space");
    for (u32 slot = 0; slot < freq16_.size(); ++slot) {
      if (seen[slot] != freq16_[slot])
        raise(Errc::CorruptStream, "alias decomposition does not reconstruct slot widths");
    }
  }

  std::vector<u32> freq16_;
  std::vector<u32> cum_;
  std::vector<IntervalSet> sets_;
  std::vector<Bucket> buckets_;
  std::vector<u32> dense_;
  u32 bucket_bits_ = 0;
};

}  // namespace blitz
