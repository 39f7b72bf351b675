#pragma once

// Exact integer convolution and cyclic correlation.
//
// Sums are computed modulo two fixed 62-bit NTT-friendly primes and
// reconstructed by CRT into signed 128-bit integers, so results are exact
// whenever their magnitude stays below max_exact_magnitude() (about 2^121).
// Callers are responsible for bounding their inputs; the convolution
// engine enforces this at entry.

#include <cstddef>
#include <vector>

#include "sparseconv/int128.hpp"

namespace sparseconv {

inline constexpr u64 kNttPrime1 = 4179340454199820289ull;  // 29 * 2^57 + 1
inline constexpr u64 kNttPrime2 = 1945555039024054273ull;  // 27 * 2^56 + 1

// Largest |value| reconstructed correctly: (kNttPrime1*kNttPrime2 - 1) / 2.
i128 max_exact_magnitude();

// A frequency-domain vector: one residue array per prime, in Montgomery
// form, of the owning plan's transform length.
struct FreqVec {
  std::vector<u64> res1, res2;
};

// Transform plan for one power-of-two length. Immutable once built; safe
// to share across threads.
class NttPlan {
 public:
  explicit NttPlan(std::size_t min_length);

  std::size_t length() const { return n_; }

  // Forward transform of v (zero-padded to the plan length).
  FreqVec forward(const std::vector<i128>& v) const;
  // Forward transform of v reversed; used to turn convolution into
  // correlation.
  FreqVec forward_reversed(const std::vector<i128>& v) const;

  // acc += a * b * scale, pointwise per prime. acc may start empty.
  void multiply_add(FreqVec& acc, const FreqVec& a, const FreqVec& b, i64 scale) const;

  // a *= b pointwise per prime; avoids a third buffer on the dense path.
  void multiply_into(FreqVec& a, const FreqVec& b) const;

  // Inverse transform plus CRT reconstruction to signed integers.
  std::vector<i128> inverse(const FreqVec& f) const;
  // In-place variant: consumes f's buffers instead of copying them.
  std::vector<i128> inverse(FreqVec&& f) const;

 private:
  FreqVec forward_impl(const std::vector<i128>& v, bool reversed) const;

  std::size_t n_ = 0;
  unsigned log_n_ = 0;
  std::vector<u64> fwd_roots1_, inv_roots1_, fwd_roots2_, inv_roots2_;  // per level
  u64 n_inv1_ = 0, n_inv2_ = 0;  // 1/n in Montgomery form, per prime
};

// Linear convolution C[t] = sum_{u+v=t} A[u]*B[v], length |A|+|B|-1.
// Schoolbook below a small size product, NTT-based otherwise.
std::vector<i128> exact_linear_convolution(const std::vector<i128>& a,
                                           const std::vector<i128>& b);

// Cyclic correlation C[s] = sum_m A[(s+m) mod q] * B[m] with q = |A| = |B|.
// Direct O(q^2) for small q, otherwise linear convolution with B reversed
// plus wrap-around folding.
std::vector<i128> exact_cyclic_correlation(const std::vector<i128>& a,
                                           const std::vector<i128>& b);

}  // namespace sparseconv
