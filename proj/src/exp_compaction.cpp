#include "sparseconv/exp_compaction.hpp"

#include <algorithm>
#include <cmath>

#include "sparseconv/errors.hpp"
#include "sparseconv/primality.hpp"

namespace sparseconv {
namespace {

// Plain sieve of all primes <= limit, used to seed the segmented sieve.
std::vector<u64> small_primes_upto(u64 limit) {
  std::vector<bool> composite(limit + 1, false);
  std::vector<u64> primes;
  for (u64 i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (u64 j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

mpz_class mpz_from_u64(u64 v) {
  mpz_class x;
  mpz_import(x.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return x;
}

}  // namespace

ProductTree product_tree(const std::vector<mpz_class>& values) {
  if (values.empty()) throw EngineError("product tree needs at least one value");
  ProductTree tree;
  tree.levels.push_back(values);
  while (tree.levels.back().size() > 1) {
    const auto& below = tree.levels.back();
    std::vector<mpz_class> level;
    level.reserve((below.size() + 1) / 2);
    for (std::size_t i = 0; i < below.size(); i += 2) {
      if (i + 1 < below.size())
        level.push_back(below[i] * below[i + 1]);
      else
        level.push_back(below[i]);
    }
    tree.levels.push_back(std::move(level));
  }
  return tree;
}

std::vector<u64> gen_primes(std::size_t count, u64 lower_bound) {
  if (count == 0) throw EngineError("prime generation needs count >= 1");
  std::vector<u64> out;
  out.reserve(count);
  const u64 segment_size = 1u << 18;
  u64 lo = std::max<u64>(lower_bound, 2);
  std::vector<u64> smalls;
  u64 smalls_limit = 0;
  std::vector<bool> composite;
  while (out.size() < count) {
    const u64 hi = lo + segment_size;  // [lo, hi)
    const u64 need = static_cast<u64>(std::sqrt(static_cast<double>(hi))) + 2;
    if (need > smalls_limit) {
      smalls_limit = need * 2;
      smalls = small_primes_upto(smalls_limit);
    }
    composite.assign(segment_size, false);
    for (u64 p : smalls) {
      if (p * p >= hi) break;
      u64 first = std::max(p * p, (lo + p - 1) / p * p);
      for (u64 j = first; j < hi; j += p) composite[j - lo] = true;
    }
    for (u64 v = lo; v < hi && out.size() < count; ++v) {
      if (v < 2 || composite[v - lo]) continue;
      if (!is_prime(v)) throw EngineError("sieve produced a composite; internal bug");
      out.push_back(v);
    }
    lo = hi;
  }
  return out;
}

PrimePool build_prime_pool(std::size_t n1) {
  const u64 n = std::max<u64>(n1, 1);
  // The pool holds n^3 + 1 primes and the product tree stores roughly
  // log2(n^3) copies of their combined bit length, so memory grows fast.
  // 192 keeps the worst case under about a gigabyte.
  if (n > 192) throw BoundError("prime pool size n1^3+1 out of supported range");
  const u64 count = n * n * n + 1;
  const u64 lower = n * n * n * n;
  return make_pool(gen_primes(count, lower));
}

PrimePool make_pool(std::vector<u64> primes) {
  if (primes.empty()) throw EngineError("prime pool must not be empty");
  std::vector<u64> sorted = primes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw EngineError("prime pool has duplicates");
  if (sorted != primes) throw EngineError("prime pool must be ascending");
  PrimePool pool;
  std::vector<mpz_class> leaves;
  leaves.reserve(primes.size());
  for (u64 p : primes) {
    if (!is_prime(p)) throw EngineError(std::to_string(p) + " is not prime");
    leaves.push_back(mpz_from_u64(p));
  }
  pool.primes = std::move(primes);
  pool.tree = product_tree(leaves);
  return pool;
}

mpz_class pairwise_diff_product(const std::vector<u64>& indices) {
  std::vector<u64> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() < 2) throw EngineError("difference product needs at least 2 distinct indices");
  std::vector<mpz_class> diffs;
  diffs.reserve(sorted.size() * (sorted.size() - 1) / 2);
  for (std::size_t j = 1; j < sorted.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) diffs.push_back(mpz_from_u64(sorted[j] - sorted[i]));
  return product_tree(diffs).root();
}

GoodPrime find_good_prime(const std::vector<u64>& indices, const PrimePool& pool) {
  GoodPrime result;
  result.q_bits = mpz_sizeinbase(pool.tree.root().get_mpz_t(), 2);
  const mpz_class d = pairwise_diff_product(indices);
  result.d_bits = mpz_sizeinbase(d.get_mpz_t(), 2);

  mpz_class p = pool.tree.root() / gcd(pool.tree.root(), d);
  if (p == 1)
    throw EngineError("every pool prime divides a pairwise difference; pool sizing violated");

  // Walk down the tree, keeping the half whose subset product still
  // shares a factor with p. Restricting p to that gcd keeps operands
  // small without changing any decision: p's primes outside the current
  // subtree can never divide a product inside it.
  std::size_t node = 0;
  for (std::size_t level = pool.tree.levels.size() - 1; level > 0; --level) {
    const auto& below = pool.tree.levels[level - 1];
    const std::size_t left = 2 * node;
    const std::size_t right = left + 1;
    if (right >= below.size()) {
      node = left;  // promoted single child; same product, no decision
      ++result.rounds;
      continue;
    }
    const mpz_class left_gcd = gcd(p, below[left]);
    if (left_gcd > 1) {
      p = left_gcd;
      node = left;
    } else {
      p = gcd(p, below[right]);
      node = right;
    }
    if (p == 1) throw EngineError("subset search lost every candidate prime; internal bug");
    ++result.rounds;
  }
  result.p = pool.primes[node];
  return result;
}

CompactOutcome compact(const SparseVector& v1, const SparseVector& v2, const PrimePool& pool) {
  std::vector<u64> support;
  support.reserve(v1.nnz() + v2.nnz());
  for (const auto& e : v1.entries) support.push_back(e.index);
  for (const auto& e : v2.entries) support.push_back(e.index);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  CompactOutcome outcome;
  auto& info = outcome.info;
  info.original_length_v1 = v1.length;
  info.original_length_v2 = v2.length;
  info.pool_size = pool.primes.size();
  info.q_bits = mpz_sizeinbase(pool.tree.root().get_mpz_t(), 2);
  if (support.size() < 2) {
    info.p = pool.primes.front();  // nothing can collide
  } else {
    const GoodPrime good = find_good_prime(support, pool);
    info.p = good.p;
    info.rounds = good.rounds;
    info.d_bits = good.d_bits;
  }

  info.index_map.reserve(support.size());
  for (u64 idx : support) info.index_map.emplace_back(idx, idx % info.p);
  for (std::size_t i = 1; i < info.index_map.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (info.index_map[i].second == info.index_map[j].second)
        throw EngineError("compaction prime maps two indices together; internal bug");
    }
  }

  const auto remap = [&info](const SparseVector& v) {
    SparseVector out;
    out.length = info.p;
    out.entries.reserve(v.nnz());
    for (const auto& e : v.entries) out.entries.push_back({e.index % info.p, e.value});
    std::sort(out.entries.begin(), out.entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    return out;
  };
  outcome.v1 = remap(v1);
  outcome.v2 = remap(v2);
  return outcome;
}

CompactOutcome compact(const SparseVector& v1, const SparseVector& v2) {
  return compact(v1, v2, build_prime_pool(std::max<std::size_t>(v1.nnz(), 1)));
}

}  // namespace sparseconv
