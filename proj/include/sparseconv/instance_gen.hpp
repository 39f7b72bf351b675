#pragma once

// Seeded random instance generation for self-tests and the bench tool.
// All draws go through one fixed rejection-sampling layer over
// mt19937_64, so a seed reproduces the same instance on any platform and
// standard library.

#include <random>

#include "sparseconv/int128.hpp"
#include "sparseconv/sparse_vector.hpp"

namespace sparseconv {

// Uniform draw from [0, bound); bound >= 1.
u64 bounded_rand(std::mt19937_64& rng, u64 bound);

struct InstanceSpec {
  u64 length = 1;        // declared vector length
  std::size_t nnz = 0;   // support size, <= length
  i64 value_min = -100;  // inclusive; the range must contain a non-zero
  i64 value_max = 100;   // inclusive
};

// nnz distinct indices drawn uniformly without replacement from
// [0, length), each with a uniform non-zero value from the range.
SparseVector random_sparse_vector(std::mt19937_64& rng, const InstanceSpec& spec);

}  // namespace sparseconv
