#pragma once

#include <cstddef>
#include <cstdint>

namespace blitz {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i32 = std::int32_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

// All probabilities live on a fixed 16-bit grid: an integer U stands for U / 2^16.
inline constexpr u32 kProbBits = 16;
inline constexpr u32 kProbScale = 1u << kProbBits;  // 65536

// A 16-bit code unit, the only thing ever written to a compressed stream.
using Code16 = u16;

// Default grid precision for numeric columns, by the width of the source
// type; integers use 1.
inline constexpr double kSinglePrecisionDefault = 1e-7;
inline constexpr double kDoublePrecisionDefault = 1e-17;

}  // namespace blitz
