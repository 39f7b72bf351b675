#pragma once

// Deterministic length-reduction scheme.
//
// Given the support of V1, this module picks encoding parameters (c, q),
// enumerates candidate assignment values, builds the singleton table
// (which polynomial maps alone to its position under which assignment),
// and greedily selects a small assignment set under which every generated
// polynomial is a singleton at least once. The selected assignments drive
// the reduced per-assignment vectors consumed by the convolution engine.

#include <cstdint>
#include <string>
#include <vector>

#include "sparseconv/poly_encode.hpp"
#include "sparseconv/sparse_vector.hpp"

namespace sparseconv {

struct SchemeConfig {
  unsigned c_cap = 4;        // largest degree bound tried
  u64 q_cap = u64{1} << 26;  // keeps correlation sums inside the exact range
  u64 forced_q = 0;          // debug: use exactly this modulus (0 = automatic)
  unsigned forced_c = 0;     // debug: use exactly this degree bound (0 = automatic)
};

// Packed 0/1 matrix. Rows correspond to candidate assignment values,
// columns to generated polynomials; a set cell means the polynomial maps
// alone to its position in the reduced vector of that row's assignment.
struct SingletonTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t words_per_row = 0;
  std::vector<u64> bits;        // row-major, words_per_row words per row
  std::vector<u64> row_values;  // assignment value of each row, ascending

  bool get(std::size_t row, std::size_t col) const {
    return (bits[row * words_per_row + col / 64] >> (col % 64)) & 1;
  }
  void set(std::size_t row, std::size_t col) {
    bits[row * words_per_row + col / 64] |= u64{1} << (col % 64);
  }
  std::size_t count_true(std::size_t col) const;
};

struct ReductionScheme {
  EncodingParams params;
  bool forced = false;           // built from debug-forced parameters
  std::vector<u64> assignments;  // selected values, in greedy pick order
  // Polynomial ordinal -> ordinal of the first selected assignment under
  // which it is a singleton.
  std::vector<std::uint32_t> coverage;
  // All variants of all V1 indices, grouped by origin index (ascending),
  // variant mask ascending within a group.
  std::vector<IndexPolynomial> v1_polynomials;
  std::vector<u64> v1_indices;  // distinct origin indices, ascending
};

// One reduced vector plus its recovery side channels: position
// evaluate(p, assignment) accumulates, for each contributing polynomial p
// with source entry (i, val): val, 1, i, and i^2. The index moments ride
// the count channel (weight 1) so that value cancellation cannot corrupt
// them.
struct ReducedBundle {
  u64 assignment = 0;
  std::vector<i64> value_vec;
  std::vector<i64> count_vec;
  std::vector<i128> idx_vec;
  std::vector<i128> idx2_vec;
};

// Smallest degree bound c (then prime q) with: (a) every index fits c+1
// digits in base (q-1)/2, checked at the minimal q for that c; (b)
// q >= 2*c*2^(c+1)*n1; (c) at least c*2^(c+1)*n1 sibling-collision-free
// candidate values remain (on shortfall q advances to the next prime).
// Throws ExpCaseNeeded when no c <= c_cap works within q_cap. Forced
// parameters skip the search but still validate the digit budget.
EncodingParams choose_parameters(u64 max_index, std::size_t n1, const SchemeConfig& config = {});

// Values a where two variants of one origin index would evaluate equal.
// Variant-pair differences do not depend on the origin index, so this set
// serves every index set; it has at most c*3^c elements.
std::vector<u64> sibling_bad_values(const EncodingParams& params);

// The first 2*c*|polys| sibling-free values of F_q, ascending (that is
// c*2^(c+1)*n1 when polys is complete for V1). Throws EngineError on a
// shortfall unless allow_short is set.
std::vector<u64> candidate_assignments(const EncodingParams& params,
                                       const std::vector<IndexPolynomial>& polys,
                                       bool allow_short = false);

// Cell (i, j) set iff polynomial j maps alone to its position among all
// polys' positions under candidates[i].
SingletonTable build_singleton_table(const std::vector<IndexPolynomial>& polys,
                                     const std::vector<u64>& candidates,
                                     const EncodingParams& params);

struct SelectionResult {
  std::vector<u64> assignments;
  std::vector<std::uint32_t> coverage;
};

// Greedy halving: repeatedly pick the row covering the most surviving
// columns (ties: smallest assignment value), delete covered columns.
// In strict mode a round where no row covers half the survivors is an
// error (the table invariants make it impossible).
SelectionResult select_assignments(const SingletonTable& table, bool strict = true);

// End-to-end composition. Deterministic: identical input yields an
// identical scheme.
ReductionScheme build_scheme(const SparseVector& v1, const SchemeConfig& config = {});

// Accumulates all variants of every v1 entry under assignment ordinal t.
ReducedBundle reduce_v1(const SparseVector& v1, const ReductionScheme& scheme, std::size_t t);

// Same, but v2 entries contribute through their base polynomial only.
// Every v2 index must be encodable under scheme.params.
ReducedBundle reduce_v2(const SparseVector& v2, const ReductionScheme& scheme, std::size_t t);

// Text dump: q, c, assignment list, then one line per polynomial
// "poly <origin_index> <variant_mask> covered_by <assignment>".
std::string scheme_debug_dump(const ReductionScheme& scheme);

}  // namespace sparseconv
