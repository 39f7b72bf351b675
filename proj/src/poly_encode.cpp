#include "sparseconv/poly_encode.hpp"

#include <limits>

#include "sparseconv/errors.hpp"
#include "sparseconv/primality.hpp"

namespace sparseconv {

u64 EncodingParams::max_encodable() const {
  u128 bound = 1;
  for (unsigned k = 0; k < digits(); ++k) {
    bound *= radix;
    if (bound > std::numeric_limits<u64>::max()) return std::numeric_limits<u64>::max();
  }
  return static_cast<u64>(bound) - 1;
}

EncodingParams EncodingParams::make(u64 q, unsigned c) {
  if (q < 5 || !is_prime(q)) throw EngineError("encoding modulus must be a prime >= 5");
  // Position arithmetic assumes products of residues fit in 64 bits.
  if (q > (u64{1} << 31)) throw EngineError("encoding modulus out of supported range");
  if (c < 1) throw EngineError("degree bound must be >= 1");
  return EncodingParams{q, c, (q - 1) / 2};
}

IndexPolynomial encode_base(u64 index, const EncodingParams& params) {
  IndexPolynomial p;
  p.coeffs.assign(params.digits(), 0);
  p.origin_index = index;
  u64 rest = index;
  for (unsigned k = 0; k < params.digits(); ++k) {
    p.coeffs[k] = rest % params.radix;
    rest /= params.radix;
  }
  if (rest != 0)
    throw EngineError("index " + std::to_string(index) + " needs more than " +
                      std::to_string(params.digits()) + " digits in base " +
                      std::to_string(params.radix));
  return p;
}

std::vector<IndexPolynomial> make_variants(const IndexPolynomial& base,
                                           const EncodingParams& params) {
  std::vector<IndexPolynomial> out;
  out.reserve(params.variants_per_index());
  for (unsigned mask = 0; mask < params.variants_per_index(); ++mask) {
    IndexPolynomial v = base;
    v.variant_mask = mask;
    for (unsigned k = 0; k < params.c; ++k) {
      if (mask & (1u << k)) {
        v.coeffs[k] = (v.coeffs[k] + params.radix) % params.q;
        v.coeffs[k + 1] = (v.coeffs[k + 1] + params.q - 1) % params.q;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

u64 evaluate(const IndexPolynomial& p, u64 a, const EncodingParams& params) {
  u64 acc = 0;
  for (std::size_t k = p.coeffs.size(); k-- > 0;) {
    acc = (mul_mod(acc, a, params.q) + p.coeffs[k]) % params.q;
  }
  return acc;
}

unsigned aligned_variant_of_sum(u64 i, u64 j, const EncodingParams& params) {
  IndexPolynomial bi = encode_base(i, params);
  IndexPolynomial bj = encode_base(j, params);
  if (i > params.max_encodable() - j)
    throw EngineError("index sum exceeds the encodable range");
  encode_base(i + j, params);  // reject sums needing an extra digit
  unsigned mask = 0;
  u64 carry = 0;
  for (unsigned k = 0; k < params.c; ++k) {
    u64 digit = bi.coeffs[k] + bj.coeffs[k] + carry;
    carry = digit >= params.radix ? 1 : 0;
    mask |= static_cast<unsigned>(carry) << k;
  }
  return mask;
}

i64 coeff_as_integer(u64 residue, const EncodingParams& params) {
  if (residue >= params.q) throw EngineError("coefficient out of residue range");
  return residue == params.q - 1 ? -1 : static_cast<i64>(residue);
}

i128 decode_integer(const IndexPolynomial& p, const EncodingParams& params) {
  i128 value = 0;
  i128 scale = 1;
  for (u64 coeff : p.coeffs) {
    value += scale * coeff_as_integer(coeff, params);
    scale *= static_cast<i128>(params.radix);
  }
  return value;
}

}  // namespace sparseconv
