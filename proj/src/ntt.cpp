#include "sparseconv/ntt.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "sparseconv/errors.hpp"
#include "sparseconv/primality.hpp"

namespace sparseconv {
namespace {

// Montgomery arithmetic mod one odd prime, R = 2^64.
struct Mont {
  u64 p = 0;
  u64 ninv = 0;  // -p^{-1} mod 2^64
  u64 r2 = 0;    // (2^64)^2 mod p
  u64 one = 0;   // 2^64 mod p, i.e. 1 in Montgomery form

  static Mont make(u64 p) {
    Mont m;
    m.p = p;
    u64 inv = p;  // Newton iteration for p^{-1} mod 2^64 (p odd)
    for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
    m.ninv = ~inv + 1;
    m.one = static_cast<u64>((static_cast<u128>(1) << 64) % p);
    m.r2 = static_cast<u64>(static_cast<u128>(m.one) * m.one % p);
    return m;
  }

  u64 mul(u64 a, u64 b) const {
    u128 t = static_cast<u128>(a) * b;
    u64 m = static_cast<u64>(t) * ninv;
    u64 r = static_cast<u64>((t + static_cast<u128>(m) * p) >> 64);
    return r >= p ? r - p : r;
  }
  u64 add(u64 a, u64 b) const {
    u64 s = a + b;
    return s >= p ? s - p : s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + p - b; }
  u64 to(u64 x) const { return mul(x % p, r2); }
  u64 from(u64 x) const { return mul(x, 1); }
  u64 pow(u64 base, u64 e) const {  // base in Montgomery form
    u64 acc = one;
    while (e) {
      if (e & 1) acc = mul(acc, base);
      base = mul(base, base);
      e >>= 1;
    }
    return acc;
  }
  u64 inv(u64 x) const { return pow(x, p - 2); }
};

const Mont& mont1() {
  static const Mont m = Mont::make(kNttPrime1);
  return m;
}
const Mont& mont2() {
  static const Mont m = Mont::make(kNttPrime2);
  return m;
}

// Smallest primitive root, verified against the given factor list of p-1.
// Returned in Montgomery form.
u64 find_primitive_root(const Mont& m, std::initializer_list<u64> factors) {
  for (u64 g = 2;; ++g) {
    u64 gm = m.to(g);
    bool primitive = true;
    for (u64 f : factors) {
      if (m.pow(gm, (m.p - 1) / f) == m.one) {
        primitive = false;
        break;
      }
    }
    if (primitive) return gm;
  }
}

u64 root1() {
  static const u64 g = find_primitive_root(mont1(), {2, 29});  // p-1 = 29 * 2^57
  return g;
}
u64 root2() {
  static const u64 g = find_primitive_root(mont2(), {2, 3});  // p-1 = 27 * 2^56
  return g;
}

// In-place radix-2 transform; level_roots[L] is w_len for len = 2^(L+1),
// in Montgomery form.
void ntt_inplace(std::vector<u64>& a, const Mont& m, const std::vector<u64>& level_roots) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  unsigned level = 0;
  for (std::size_t len = 2; len <= n; len <<= 1, ++level) {
    const u64 wlen = level_roots[level];
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      u64 w = m.one;
      for (std::size_t j = 0; j < half; ++j) {
        u64 u = a[i + j];
        u64 v = m.mul(a[i + j + half], w);
        a[i + j] = m.add(u, v);
        a[i + j + half] = m.sub(u, v);
        w = m.mul(w, wlen);
      }
    }
  }
}

u64 residue_of(i128 x, const Mont& m) {
  i128 r = x % static_cast<i128>(m.p);
  if (r < 0) r += static_cast<i128>(m.p);
  return static_cast<u64>(r);
}

u64 inv_p1_mod_p2() {
  // kNttPrime1^{-1} mod kNttPrime2, for CRT reconstruction.
  static const u64 v = [] {
    const Mont& m = mont2();
    return m.from(m.inv(m.to(kNttPrime1)));
  }();
  return v;
}

}  // namespace

i128 max_exact_magnitude() {
  u128 product = static_cast<u128>(kNttPrime1) * kNttPrime2;
  return static_cast<i128>((product - 1) / 2);
}

NttPlan::NttPlan(std::size_t min_length) {
  n_ = 1;
  log_n_ = 0;
  while (n_ < min_length) {
    n_ <<= 1;
    ++log_n_;
  }
  if (log_n_ > 40) throw BoundError("transform length out of supported range");
  const Mont& m1 = mont1();
  const Mont& m2 = mont2();
  fwd_roots1_.resize(log_n_);
  inv_roots1_.resize(log_n_);
  fwd_roots2_.resize(log_n_);
  inv_roots2_.resize(log_n_);
  for (unsigned level = 0; level < log_n_; ++level) {
    const u64 len = u64{2} << level;
    fwd_roots1_[level] = m1.pow(root1(), (m1.p - 1) / len);
    inv_roots1_[level] = m1.inv(fwd_roots1_[level]);
    fwd_roots2_[level] = m2.pow(root2(), (m2.p - 1) / len);
    inv_roots2_[level] = m2.inv(fwd_roots2_[level]);
  }
  // Plain (non-Montgomery) 1/n, so one Montgomery multiply both unscales
  // and leaves the domain during the inverse transform.
  n_inv1_ = m1.from(m1.inv(m1.to(static_cast<u64>(n_))));
  n_inv2_ = m2.from(m2.inv(m2.to(static_cast<u64>(n_))));
}

FreqVec NttPlan::forward_impl(const std::vector<i128>& v, bool reversed) const {
  if (v.size() > n_) throw BoundError("input longer than transform length");
  FreqVec f;
  f.res1.assign(n_, 0);
  f.res2.assign(n_, 0);
  const Mont& m1 = mont1();
  const Mont& m2 = mont2();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t pos = reversed ? v.size() - 1 - i : i;
    f.res1[pos] = m1.to(residue_of(v[i], m1));
    f.res2[pos] = m2.to(residue_of(v[i], m2));
  }
  ntt_inplace(f.res1, m1, fwd_roots1_);
  ntt_inplace(f.res2, m2, fwd_roots2_);
  return f;
}

FreqVec NttPlan::forward(const std::vector<i128>& v) const { return forward_impl(v, false); }

FreqVec NttPlan::forward_reversed(const std::vector<i128>& v) const {
  return forward_impl(v, true);
}

void NttPlan::multiply_add(FreqVec& acc, const FreqVec& a, const FreqVec& b, i64 scale) const {
  if (acc.res1.empty()) {
    acc.res1.assign(n_, 0);
    acc.res2.assign(n_, 0);
  }
  const Mont& m1 = mont1();
  const Mont& m2 = mont2();
  const u64 s1 = m1.to(residue_of(scale, m1));
  const u64 s2 = m2.to(residue_of(scale, m2));
  for (std::size_t i = 0; i < n_; ++i) {
    acc.res1[i] = m1.add(acc.res1[i], m1.mul(m1.mul(a.res1[i], b.res1[i]), s1));
    acc.res2[i] = m2.add(acc.res2[i], m2.mul(m2.mul(a.res2[i], b.res2[i]), s2));
  }
}

void NttPlan::multiply_into(FreqVec& a, const FreqVec& b) const {
  const Mont& m1 = mont1();
  const Mont& m2 = mont2();
  for (std::size_t i = 0; i < n_; ++i) {
    a.res1[i] = m1.mul(a.res1[i], b.res1[i]);
    a.res2[i] = m2.mul(a.res2[i], b.res2[i]);
  }
}

std::vector<i128> NttPlan::inverse(const FreqVec& f) const { return inverse(FreqVec(f)); }

std::vector<i128> NttPlan::inverse(FreqVec&& f) const {
  std::vector<u64> r1 = std::move(f.res1);
  std::vector<u64> r2 = std::move(f.res2);
  const Mont& m1 = mont1();
  const Mont& m2 = mont2();
  ntt_inplace(r1, m1, inv_roots1_);
  ntt_inplace(r2, m2, inv_roots2_);
  const u128 modulus = static_cast<u128>(kNttPrime1) * kNttPrime2;
  const u128 half = (modulus - 1) / 2;
  std::vector<i128> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const u64 a = m1.mul(r1[i], n_inv1_);  // plain residue mod p1
    const u64 b = m2.mul(r2[i], n_inv2_);  // plain residue mod p2
    const u64 diff = m2.sub(b, a % kNttPrime2);
    const u64 t = mul_mod(diff, inv_p1_mod_p2(), kNttPrime2);
    const u128 x = static_cast<u128>(a) + static_cast<u128>(kNttPrime1) * t;
    out[i] = x > half ? static_cast<i128>(x) - static_cast<i128>(modulus)
                      : static_cast<i128>(x);
  }
  return out;
}

std::vector<i128> exact_linear_convolution(const std::vector<i128>& a,
                                           const std::vector<i128>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  if (static_cast<u128>(a.size()) * b.size() <= 4096) {
    std::vector<i128> out(out_len, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  }
  NttPlan plan(out_len);
  FreqVec fa = plan.forward(a);
  {
    FreqVec fb = plan.forward(b);
    plan.multiply_into(fa, fb);
  }
  std::vector<i128> full = plan.inverse(std::move(fa));
  full.resize(out_len);
  return full;
}

std::vector<i128> exact_cyclic_correlation(const std::vector<i128>& a,
                                           const std::vector<i128>& b) {
  const std::size_t q = a.size();
  if (b.size() != q) throw EngineError("correlation inputs must have equal length");
  if (q == 0) return {};
  if (q <= 64) {
    std::vector<i128> out(q, 0);
    for (std::size_t s = 0; s < q; ++s)
      for (std::size_t m = 0; m < q; ++m) out[s] += a[(s + m) % q] * b[m];
    return out;
  }
  std::vector<i128> rev(b.rbegin(), b.rend());
  std::vector<i128> lin = exact_linear_convolution(a, rev);
  // lin[t] collects pairs with u - m = t - (q-1); offset s appears at
  // t = s+q-1 and, for s >= 1, also wraps around at t = s-1.
  std::vector<i128> out(q);
  for (std::size_t s = 0; s < q; ++s) {
    out[s] = lin[s + q - 1] + (s >= 1 ? lin[s - 1] : 0);
  }
  return out;
}

}  // namespace sparseconv
