#include "sparseconv/ntt.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "sparseconv/errors.hpp"
#include "sparseconv/instance_gen.hpp"
#include "sparseconv/primality.hpp"

namespace sparseconv {
namespace {

std::vector<i128> schoolbook_conv(const std::vector<i128>& a, const std::vector<i128>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<i128> out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<i128> direct_correlation(const std::vector<i128>& a, const std::vector<i128>& b) {
  const std::size_t q = a.size();
  std::vector<i128> out(q, 0);
  for (std::size_t s = 0; s < q; ++s)
    for (std::size_t m = 0; m < q; ++m) out[s] += a[(s + m) % q] * b[m];
  return out;
}

TEST(Ntt, PrimesAreNttFriendly) {
  EXPECT_TRUE(is_prime(kNttPrime1));
  EXPECT_TRUE(is_prime(kNttPrime2));
  EXPECT_EQ(kNttPrime1, 29 * (u64{1} << 57) + 1);
  EXPECT_EQ(kNttPrime2, 27 * (u64{1} << 56) + 1);
  const i128 prod_half = (i128(kNttPrime1) * i128(kNttPrime2) - 1) / 2;
  EXPECT_EQ(max_exact_magnitude(), prod_half);
  EXPECT_GT(max_exact_magnitude(), i128(1) << 121);
}

TEST(Ntt, LinearConvolutionSmallOracle) {
  std::vector<i128> a{1, 2, 3};
  std::vector<i128> b{4, 5};
  EXPECT_EQ(exact_linear_convolution(a, b), (std::vector<i128>{4, 13, 22, 15}));
  EXPECT_TRUE(exact_linear_convolution({}, b).empty());
  EXPECT_TRUE(exact_linear_convolution(a, {}).empty());
}

TEST(Ntt, LinearConvolutionMatchesSchoolbookOnNttPath) {
  std::mt19937_64 rng(7);
  // 90*90 exceeds the schoolbook cutoff, so this exercises the transform.
  std::vector<i128> a(90), b(90);
  for (auto& x : a) x = static_cast<i64>(bounded_rand(rng, 2001)) - 1000;
  for (auto& x : b) x = static_cast<i64>(bounded_rand(rng, 2001)) - 1000;
  EXPECT_EQ(exact_linear_convolution(a, b), schoolbook_conv(a, b));
}

TEST(Ntt, LinearConvolutionNearMagnitudeLimit) {
  // Two spikes of 2^60 in transform-length-forcing vectors: the product
  // 2^120 sits within a factor 4 of the exact range.
  std::vector<i128> a(80, 0), b(80, 0);
  a[3] = i128(1) << 60;
  a[79] = -(i128(1) << 60);
  b[5] = i128(1) << 60;
  std::vector<i128> got = exact_linear_convolution(a, b);
  EXPECT_EQ(got[8], i128(1) << 120);
  EXPECT_EQ(got[84], -(i128(1) << 120));
}

TEST(Ntt, CyclicCorrelationDelta) {
  // A = e3, B = e1 over q = 5: C[s] = [3 = s + 1 mod 5], so C = e2.
  std::vector<i128> a(5, 0), b(5, 0);
  a[3] = 1;
  b[1] = 1;
  std::vector<i128> c = exact_cyclic_correlation(a, b);
  for (std::size_t s = 0; s < 5; ++s) EXPECT_EQ(c[s], s == 2 ? 1 : 0);
}

TEST(Ntt, CyclicCorrelationMatchesDirectBothPaths) {
  std::mt19937_64 rng(11);
  for (std::size_t q : {5u, 13u, 64u, 101u, 257u}) {
    std::vector<i128> a(q), b(q);
    for (auto& x : a) x = static_cast<i64>(bounded_rand(rng, 41)) - 20;
    for (auto& x : b) x = static_cast<i64>(bounded_rand(rng, 41)) - 20;
    EXPECT_EQ(exact_cyclic_correlation(a, b), direct_correlation(a, b)) << "q=" << q;
  }
}

TEST(Ntt, PlanRoundTripAndReversal) {
  std::mt19937_64 rng(23);
  std::vector<i128> a(50), b(70);
  for (auto& x : a) x = static_cast<i64>(bounded_rand(rng, 201)) - 100;
  for (auto& x : b) x = static_cast<i64>(bounded_rand(rng, 201)) - 100;

  NttPlan plan(a.size() + b.size() - 1);
  EXPECT_GE(plan.length(), a.size() + b.size() - 1);
  EXPECT_EQ(plan.length() & (plan.length() - 1), 0u);

  // forward + multiply_add(scale 1) + inverse is plain convolution.
  FreqVec fa = plan.forward(a);
  FreqVec fb = plan.forward(b);
  FreqVec acc;
  plan.multiply_add(acc, fa, fb, 1);
  std::vector<i128> conv = plan.inverse(acc);
  conv.resize(a.size() + b.size() - 1);
  EXPECT_EQ(conv, schoolbook_conv(a, b));

  // forward_reversed(b) correlates instead: lin[t] = sum a[u] b[u - t + |b| - 1].
  FreqVec fbr = plan.forward_reversed(b);
  FreqVec acc2;
  plan.multiply_add(acc2, fa, fbr, 1);
  std::vector<i128> corr = plan.inverse(std::move(acc2));
  std::vector<i128> brev(b.rbegin(), b.rend());
  std::vector<i128> expect = schoolbook_conv(a, brev);
  corr.resize(expect.size());
  EXPECT_EQ(corr, expect);
}

TEST(Ntt, MultiplyAddAccumulatesWithScales) {
  std::vector<i128> a{3, -1, 4};
  std::vector<i128> b{2, 7};
  NttPlan plan(4);
  FreqVec fa = plan.forward(a);
  FreqVec fb = plan.forward(b);
  FreqVec acc;
  plan.multiply_add(acc, fa, fb, 1);
  plan.multiply_add(acc, fa, fb, -2);  // net scale -1
  std::vector<i128> got = plan.inverse(acc);
  std::vector<i128> expect = schoolbook_conv(a, b);
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(got[i], -expect[i]);
}

TEST(Ntt, MultiplyIntoMatchesMultiplyAdd) {
  std::mt19937_64 rng(31);
  std::vector<i128> a(33), b(17);
  for (auto& x : a) x = static_cast<i64>(bounded_rand(rng, 19)) - 9;
  for (auto& x : b) x = static_cast<i64>(bounded_rand(rng, 19)) - 9;
  NttPlan plan(a.size() + b.size() - 1);

  FreqVec fa = plan.forward(a);
  FreqVec fb = plan.forward(b);
  FreqVec acc;
  plan.multiply_add(acc, fa, fb, 1);
  std::vector<i128> via_add = plan.inverse(acc);

  plan.multiply_into(fa, fb);
  std::vector<i128> via_into = plan.inverse(std::move(fa));
  EXPECT_EQ(via_into, via_add);
}

TEST(Ntt, PlanRejectsAbsurdLength) {
  EXPECT_THROW(NttPlan(std::size_t{1} << 50), BoundError);
  EXPECT_EQ(NttPlan(0).length(), 1u);  // degenerate but valid
  EXPECT_THROW(NttPlan(2).forward(std::vector<i128>(3, 1)), BoundError);
}

}  // namespace
}  // namespace sparseconv
