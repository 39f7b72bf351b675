#include "sparseconv/instance_gen.hpp"

#include <algorithm>
#include <unordered_set>

#include "sparseconv/errors.hpp"

namespace sparseconv {

u64 bounded_rand(std::mt19937_64& rng, u64 bound) {
  if (bound == 0) throw EngineError("bounded draw needs bound >= 1");
  const u64 threshold = (~bound + 1) % bound;  // 2^64 mod bound
  for (;;) {
    const u64 r = rng();
    if (r >= threshold) return r % bound;
  }
}

namespace {

i64 random_nonzero_value(std::mt19937_64& rng, i64 lo, i64 hi) {
  const u64 span = static_cast<u64>(i128(hi) - i128(lo) + 1);
  for (;;) {
    const i64 v = static_cast<i64>(i128(lo) + i128(bounded_rand(rng, span)));
    if (v != 0) return v;
  }
}

}  // namespace

SparseVector random_sparse_vector(std::mt19937_64& rng, const InstanceSpec& spec) {
  if (spec.length == 0) throw EngineError("instance length must be >= 1");
  if (spec.nnz > spec.length) throw EngineError("instance support larger than its length");
  if (spec.value_min > spec.value_max || (spec.value_min == 0 && spec.value_max == 0))
    throw EngineError("instance value range contains no non-zero");

  // Floyd's sampling: uniform without replacement, nnz draws total.
  std::unordered_set<u64> chosen;
  chosen.reserve(spec.nnz * 2);
  for (u64 j = spec.length - spec.nnz; j < spec.length; ++j) {
    const u64 t = bounded_rand(rng, j + 1);
    chosen.insert(chosen.count(t) ? j : t);
  }

  std::vector<u64> indices(chosen.begin(), chosen.end());
  std::sort(indices.begin(), indices.end());
  SparseVector v;
  v.length = spec.length;
  v.entries.reserve(indices.size());
  for (u64 idx : indices)
    v.entries.push_back({idx, random_nonzero_value(rng, spec.value_min, spec.value_max)});
  return v;
}

}  // namespace sparseconv
