#pragma once

// Deterministic 64-bit primality testing, shared by parameter selection
// and the prime-pool construction.

#include "sparseconv/int128.hpp"

namespace sparseconv {

// Exact for every 64-bit input. Throws EngineError if n < 2.
bool is_prime(u64 n);

// Smallest prime >= n. Throws EngineError if none fits in 64 bits.
u64 next_prime(u64 n);

// (base^exp) mod m, m >= 1.
u64 pow_mod(u64 base, u64 exp, u64 m);

// (a*b) mod m without overflow.
inline u64 mul_mod(u64 a, u64 b, u64 m) {
  return static_cast<u64>((static_cast<u128>(a) * b) % m);
}

}  // namespace sparseconv
