#pragma once

// 128-bit integer helpers shared by the correlation and compaction code.

#include <cstdint>
#include <string>

namespace sparseconv {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

std::string to_string_i128(i128 v);

// Multiplies into `out`; returns true when the product overflows the signed
// 128-bit range (out is unspecified in that case).
inline bool mul_overflow_i128(i128 a, i128 b, i128& out) {
  return __builtin_mul_overflow(a, b, &out);
}

inline i128 abs_i128(i128 v) { return v < 0 ? -v : v; }

}  // namespace sparseconv
