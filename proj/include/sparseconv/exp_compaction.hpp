#pragma once

// Index compaction for inputs whose indices exceed the polynomial-case
// digit budget. A prime p is found under which all pairwise index
// differences are non-zero mod p, so reduction mod p maps every non-zero
// injectively into a vector of size p. The prime is located by dividing
// the pool product Q by gcd(Q, D) (D = product of all differences) and
// binary-searching the survivors through the retained product tree.

#include <gmpxx.h>

#include <cstddef>
#include <utility>
#include <vector>

#include "sparseconv/int128.hpp"
#include "sparseconv/sparse_vector.hpp"

namespace sparseconv {

struct ProductTree {
  // levels[0] holds the inputs; each level pairs adjacent nodes (an odd
  // trailing node is promoted unchanged); levels.back() is the root.
  std::vector<std::vector<mpz_class>> levels;

  const mpz_class& root() const { return levels.back()[0]; }
};

// Exact product of all values with every internal node retained for
// subset-product reuse. Values must be non-empty and positive.
ProductTree product_tree(const std::vector<mpz_class>& values);

struct PrimePool {
  std::vector<u64> primes;  // ascending, distinct, all verified prime
  ProductTree tree;         // over the primes; root is Q
};

// The first `count` primes >= lower_bound, ascending, each re-verified by
// is_prime after sieving.
std::vector<u64> gen_primes(std::size_t count, u64 lower_bound);

// n1^3 + 1 primes of magnitude >= n1^4 plus their product tree.
PrimePool build_prime_pool(std::size_t n1);

// Pool over an explicit prime list (tiny walkthroughs and tests).
PrimePool make_pool(std::vector<u64> primes);

// D = product of (i - j) over all pairs i > j of distinct indices.
// Requires at least 2 distinct indices.
mpz_class pairwise_diff_product(const std::vector<u64>& indices);

struct GoodPrime {
  u64 p = 0;
  unsigned rounds = 0;     // halving steps taken by the subset search
  std::size_t q_bits = 0;  // bit length of the pool product Q
  std::size_t d_bits = 0;  // bit length of the difference product D
};

// A pool prime dividing no pairwise difference of `indices` (at least 2
// required). Throws EngineError if every pool prime divides a difference,
// which the pool sizing rules make impossible for generated pools.
GoodPrime find_good_prime(const std::vector<u64>& indices, const PrimePool& pool);

struct CompactionResult {
  u64 p = 0;
  u64 original_length_v1 = 0;
  u64 original_length_v2 = 0;
  // original index -> index mod p, over the union support, ascending.
  std::vector<std::pair<u64, u64>> index_map;
  std::size_t pool_size = 0;
  unsigned rounds = 0;
  std::size_t q_bits = 0;
  std::size_t d_bits = 0;
};

struct CompactOutcome {
  SparseVector v1, v2;
  CompactionResult info;
};

// Remaps both vectors through index mod p (new length p, values
// unchanged). Injective over the union of the two supports. With fewer
// than 2 distinct union indices the first pool prime is used directly.
CompactOutcome compact(const SparseVector& v1, const SparseVector& v2, const PrimePool& pool);

// Convenience overload that builds the pool for n1 = v1's non-zero count.
CompactOutcome compact(const SparseVector& v1, const SparseVector& v2);

}  // namespace sparseconv
