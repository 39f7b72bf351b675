#include "sparseconv/primality.hpp"

#include <limits>

#include "sparseconv/errors.hpp"

namespace sparseconv {

u64 pow_mod(u64 base, u64 exp, u64 m) {
  if (m == 1) return 0;
  u64 result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

namespace {

// One Miller-Rabin round; n odd, n > 2, n-1 = d * 2^r.
bool mr_round(u64 n, u64 a, u64 d, int r) {
  u64 x = pow_mod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < r; ++i) {
    x = mul_mod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

}  // namespace

bool is_prime(u64 n) {
  if (n < 2) throw EngineError("is_prime requires n >= 2");
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  u64 d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  // This witness set decides primality exactly for all n < 3.3e24,
  // which covers the full 64-bit range.
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (!mr_round(n, a, d, r)) return false;
  }
  return true;
}

u64 next_prime(u64 n) {
  if (n <= 2) return 2;
  u64 p = n | 1;  // first odd >= n
  for (;; p += 2) {
    if (is_prime(p)) return p;
    if (p > std::numeric_limits<u64>::max() - 2)
      throw EngineError("no prime >= requested bound fits in 64 bits");
  }
}

}  // namespace sparseconv
