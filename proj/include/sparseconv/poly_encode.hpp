#pragma once

// Index-to-polynomial encoding over F_q.
//
// An index is written in base (q-1)/2; the digits become the coefficients
// of its "base polynomial". Each base polynomial is then duplicated into
// 2^c variants: for every set bit k of a variant mask, coefficient k gains
// (q-1)/2 and coefficient k+1 loses 1. The variants enumerate all possible
// digit-carry patterns, so the digit-wise sum of two base polynomials is
// always one variant of the sum's base polynomial (see
// aligned_variant_of_sum). Evaluating a polynomial at a point of F_q maps
// the index into a vector of size q.

#include <vector>

#include "sparseconv/int128.hpp"

namespace sparseconv {

struct EncodingParams {
  u64 q = 0;       // odd prime >= 5
  unsigned c = 0;  // degree bound >= 1; every polynomial has c+1 coefficients
  u64 radix = 0;   // (q-1)/2

  unsigned digits() const { return c + 1; }
  u64 variants_per_index() const { return u64{1} << c; }

  // Largest index with at most c+1 base-radix digits, i.e. radix^(c+1)-1,
  // saturated to the u64 range.
  u64 max_encodable() const;

  // Validates q (primality, >= 5) and c >= 1.
  static EncodingParams make(u64 q, unsigned c);
};

struct IndexPolynomial {
  std::vector<u64> coeffs;  // residues mod q, little-endian (X^0 first), size c+1
  u64 origin_index = 0;
  unsigned variant_mask = 0;  // bit k set <=> +radix at k, -1 at k+1; 0 = base

  bool operator==(const IndexPolynomial&) const = default;
};

// Base-radix digit decomposition of an index. Throws EngineError if the
// index needs more than c+1 digits.
IndexPolynomial encode_base(u64 index, const EncodingParams& params);

// All 2^c carry variants of a base polynomial, in ascending mask order
// (the base itself is element 0). Every variant decodes back to the
// origin index; the top coefficient is only ever touched by the -1 rule.
std::vector<IndexPolynomial> make_variants(const IndexPolynomial& base,
                                           const EncodingParams& params);

// Horner evaluation at X = a, all arithmetic mod q. Requires a < q.
u64 evaluate(const IndexPolynomial& p, u64 a, const EncodingParams& params);

// The unique variant mask v such that base(i) + base(j), added
// coefficient-wise over the integers, equals variant v of base(i+j).
// The set bits of v are exactly the positions where base-radix addition
// of i and j carries. Requires i, j and i+j encodable.
unsigned aligned_variant_of_sum(u64 i, u64 j, const EncodingParams& params);

// Signed digit encoded by a residue. Variant coefficients only ever take
// integer values in [-1, q-2], so q-1 decodes to -1 and everything else
// to itself.
i64 coeff_as_integer(u64 residue, const EncodingParams& params);

// Integer value of a polynomial's digits in base radix, using the signed
// digit reading above. Equals origin_index for every make_variants output.
i128 decode_integer(const IndexPolynomial& p, const EncodingParams& params);

}  // namespace sparseconv
