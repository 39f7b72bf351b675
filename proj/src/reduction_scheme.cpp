#include "sparseconv/reduction_scheme.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <sstream>

#include "sparseconv/errors.hpp"
#include "sparseconv/primality.hpp"

namespace sparseconv {
namespace {

// Required candidate/row count c*2^(c+1)*n1 for a given polynomial count
// 2^c*n1, i.e. 2*c*|polys|.
u128 required_rows(const EncodingParams& params, std::size_t poly_count) {
  return u128{2} * params.c * poly_count;
}

u64 eval_coeffs(const std::vector<u64>& coeffs, u64 a, u64 q) {
  // q is capped well below 2^31, so plain 64-bit Horner cannot overflow.
  u64 acc = 0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = (acc * a + coeffs[k]) % q;
  return acc;
}

}  // namespace

std::size_t SingletonTable::count_true(std::size_t col) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows; ++r) n += get(r, col);
  return n;
}

EncodingParams choose_parameters(u64 max_index, std::size_t n1, const SchemeConfig& config) {
  if (n1 < 2) throw EngineError("parameter choice requires n1 >= 2");
  if (config.forced_q != 0 || config.forced_c != 0) {
    if (config.forced_q == 0 || config.forced_c == 0)
      throw EngineError("forced q and forced c must be given together");
    EncodingParams params = EncodingParams::make(config.forced_q, config.forced_c);
    if (max_index > params.max_encodable())
      throw EngineError("forced parameters cannot encode index " + std::to_string(max_index));
    return params;
  }
  for (unsigned c = 1; c <= config.c_cap; ++c) {
    const u128 rows = u128{2} * c * (u128{1} << c) * n1;  // c * 2^(c+1) * n1
    u128 q_floor = 2 * rows;
    if (q_floor < 5) q_floor = 5;
    if (q_floor > config.q_cap) break;  // only grows with c
    u64 q = next_prime(static_cast<u64>(q_floor));
    // Digit check at the minimal modulus; failing it means this degree
    // bound cannot reach the index range, so move to the next c rather
    // than inflating q.
    if (max_index > EncodingParams{q, c, (q - 1) / 2}.max_encodable()) continue;
    while (q <= config.q_cap) {
      EncodingParams params = EncodingParams::make(q, c);
      const u64 bad = static_cast<u64>(sibling_bad_values(params).size());
      if (params.q - bad >= rows) return params;
      q = next_prime(q + 1);
    }
  }
  throw ExpCaseNeeded("no (c, q) with c <= " + std::to_string(config.c_cap) +
                      " and q <= " + std::to_string(config.q_cap) + " encodes max index " +
                      std::to_string(max_index) + " at n1 = " + std::to_string(n1));
}

std::vector<u64> sibling_bad_values(const EncodingParams& params) {
  // Two variants of one index differ by sum_k s_k * (radix*X^k - X^(k+1))
  // with signs s in {-1,0,1}^c \ {0}; the index itself cancels. Collect
  // the difference polynomials once, then scan F_q for their roots.
  const u64 q = params.q;
  std::vector<std::vector<u64>> diffs;
  u64 pattern_count = 1;
  for (unsigned k = 0; k < params.c; ++k) pattern_count *= 3;
  for (u64 code = 1; code < pattern_count; ++code) {
    std::vector<u64> coeffs(params.digits(), 0);
    u64 rest = code;
    for (unsigned k = 0; k < params.c; ++k) {
      const int s = static_cast<int>(rest % 3) - 1;  // digits of code in base 3, shifted
      rest /= 3;
      if (s == 0) continue;
      const u64 add = s > 0 ? params.radix : q - params.radix;
      coeffs[k] = (coeffs[k] + add) % q;
      coeffs[k + 1] = (coeffs[k + 1] + (s > 0 ? q - 1 : 1)) % q;
    }
    if (std::any_of(coeffs.begin(), coeffs.end(), [](u64 x) { return x != 0; }))
      diffs.push_back(std::move(coeffs));
  }
  std::vector<u64> bad;
  for (u64 a = 0; a < q; ++a) {
    for (const auto& d : diffs) {
      if (eval_coeffs(d, a, q) == 0) {
        bad.push_back(a);
        break;
      }
    }
  }
  return bad;
}

std::vector<u64> candidate_assignments(const EncodingParams& params,
                                       const std::vector<IndexPolynomial>& polys,
                                       bool allow_short) {
  const u128 needed = required_rows(params, polys.size());
  const std::vector<u64> bad = sibling_bad_values(params);
  std::vector<u64> out;
  out.reserve(static_cast<std::size_t>(needed));
  std::size_t b = 0;
  for (u64 a = 0; a < params.q && out.size() < needed; ++a) {
    while (b < bad.size() && bad[b] < a) ++b;
    if (b < bad.size() && bad[b] == a) continue;
    out.push_back(a);
  }
  if (out.size() < needed && !allow_short)
    throw EngineError("only " + std::to_string(out.size()) + " sibling-free values, need " +
                      std::to_string(static_cast<u64>(needed)));
  return out;
}

SingletonTable build_singleton_table(const std::vector<IndexPolynomial>& polys,
                                     const std::vector<u64>& candidates,
                                     const EncodingParams& params) {
  SingletonTable table;
  table.rows = candidates.size();
  table.cols = polys.size();
  table.words_per_row = (table.cols + 63) / 64;
  table.bits.assign(table.rows * table.words_per_row, 0);
  table.row_values = candidates;

  // Occupancy counting with epoch stamps, so the q-length scratch arrays
  // are never cleared between rows.
  std::vector<std::uint32_t> stamp(params.q, 0);
  std::vector<std::uint32_t> occupancy(params.q, 0);
  std::vector<std::uint32_t> position(table.cols);
  std::uint32_t epoch = 0;
  for (std::size_t r = 0; r < table.rows; ++r) {
    ++epoch;
    const u64 a = candidates[r];
    for (std::size_t j = 0; j < table.cols; ++j) {
      const u64 pos = eval_coeffs(polys[j].coeffs, a, params.q);
      position[j] = static_cast<std::uint32_t>(pos);
      if (stamp[pos] != epoch) {
        stamp[pos] = epoch;
        occupancy[pos] = 1;
      } else {
        ++occupancy[pos];
      }
    }
    for (std::size_t j = 0; j < table.cols; ++j) {
      if (occupancy[position[j]] == 1) table.set(r, j);
    }
  }
  return table;
}

SelectionResult select_assignments(const SingletonTable& table, bool strict) {
  SelectionResult result;
  result.coverage.assign(table.cols, std::numeric_limits<std::uint32_t>::max());
  if (table.cols == 0) return result;
  if (table.rows == 0) throw EngineError("singleton table has no rows");

  std::vector<u64> alive(table.words_per_row, ~u64{0});
  if (table.cols % 64 != 0) alive.back() = (u64{1} << (table.cols % 64)) - 1;
  std::size_t remaining = table.cols;

  while (remaining > 0) {
    std::size_t best_row = table.rows;
    std::size_t best_cover = 0;
    for (std::size_t r = 0; r < table.rows; ++r) {
      std::size_t cover = 0;
      const u64* row = &table.bits[r * table.words_per_row];
      for (std::size_t w = 0; w < table.words_per_row; ++w)
        cover += static_cast<std::size_t>(std::popcount(row[w] & alive[w]));
      // Rows are in ascending assignment order, so strict > keeps the
      // smallest value on ties.
      if (cover > best_cover) {
        best_cover = cover;
        best_row = r;
      }
    }
    if (best_cover == 0) throw EngineError("no assignment covers the remaining polynomials");
    if (strict && 2 * best_cover < remaining)
      throw EngineError("no row covers half the surviving columns; table construction bug");

    const auto ordinal = static_cast<std::uint32_t>(result.assignments.size());
    result.assignments.push_back(table.row_values[best_row]);
    const u64* row = &table.bits[best_row * table.words_per_row];
    for (std::size_t w = 0; w < table.words_per_row; ++w) {
      u64 covered = row[w] & alive[w];
      while (covered) {
        const unsigned bit = static_cast<unsigned>(std::countr_zero(covered));
        result.coverage[w * 64 + bit] = ordinal;
        covered &= covered - 1;
      }
      alive[w] &= ~row[w];
    }
    remaining -= best_cover;
  }
  return result;
}

ReductionScheme build_scheme(const SparseVector& v1, const SchemeConfig& config) {
  if (v1.entries.empty()) throw EngineError("scheme construction needs at least one non-zero");
  ReductionScheme scheme;
  // The parameter rules assume n1 >= 2; single-entry inputs borrow the
  // n1 = 2 sizing.
  scheme.params = choose_parameters(v1.max_index(), std::max<std::size_t>(v1.nnz(), 2), config);
  scheme.forced = config.forced_q != 0;

  scheme.v1_indices.reserve(v1.nnz());
  scheme.v1_polynomials.reserve(v1.nnz() * scheme.params.variants_per_index());
  for (const auto& entry : v1.entries) {
    scheme.v1_indices.push_back(entry.index);
    auto variants = make_variants(encode_base(entry.index, scheme.params), scheme.params);
    for (auto& p : variants) scheme.v1_polynomials.push_back(std::move(p));
  }

  const auto candidates =
      candidate_assignments(scheme.params, scheme.v1_polynomials, scheme.forced);
  const auto table = build_singleton_table(scheme.v1_polynomials, candidates, scheme.params);
  auto selection = select_assignments(table, !scheme.forced);
  scheme.assignments = std::move(selection.assignments);
  scheme.coverage = std::move(selection.coverage);
  return scheme;
}

namespace {

ReducedBundle make_bundle(u64 assignment, u64 q) {
  ReducedBundle b;
  b.assignment = assignment;
  b.value_vec.assign(q, 0);
  b.count_vec.assign(q, 0);
  b.idx_vec.assign(q, 0);
  b.idx2_vec.assign(q, 0);
  return b;
}

void accumulate(ReducedBundle& b, u64 pos, i64 value, u64 index) {
  b.value_vec[pos] += value;
  b.count_vec[pos] += 1;
  b.idx_vec[pos] += static_cast<i128>(index);
  b.idx2_vec[pos] += static_cast<i128>(index) * index;
}

}  // namespace

ReducedBundle reduce_v1(const SparseVector& v1, const ReductionScheme& scheme, std::size_t t) {
  if (t >= scheme.assignments.size()) throw EngineError("assignment ordinal out of range");
  if (v1.nnz() != scheme.v1_indices.size())
    throw EngineError("scheme was built for a different vector");
  const u64 a = scheme.assignments[t];
  const u64 vpi = scheme.params.variants_per_index();
  ReducedBundle b = make_bundle(a, scheme.params.q);
  for (std::size_t e = 0; e < v1.entries.size(); ++e) {
    const auto& entry = v1.entries[e];
    if (entry.index != scheme.v1_indices[e])
      throw EngineError("scheme was built for a different vector");
    for (u64 m = 0; m < vpi; ++m) {
      const auto& poly = scheme.v1_polynomials[e * vpi + m];
      accumulate(b, eval_coeffs(poly.coeffs, a, scheme.params.q), entry.value, entry.index);
    }
  }
  return b;
}

ReducedBundle reduce_v2(const SparseVector& v2, const ReductionScheme& scheme, std::size_t t) {
  if (t >= scheme.assignments.size()) throw EngineError("assignment ordinal out of range");
  const u64 a = scheme.assignments[t];
  ReducedBundle b = make_bundle(a, scheme.params.q);
  for (const auto& entry : v2.entries) {
    const IndexPolynomial base = encode_base(entry.index, scheme.params);
    accumulate(b, eval_coeffs(base.coeffs, a, scheme.params.q), entry.value, entry.index);
  }
  return b;
}

std::string scheme_debug_dump(const ReductionScheme& scheme) {
  std::ostringstream out;
  out << "q: " << scheme.params.q << "\n";
  out << "c: " << scheme.params.c << "\n";
  out << "assignments:";
  for (u64 a : scheme.assignments) out << " " << a;
  out << "\n";
  for (std::size_t j = 0; j < scheme.v1_polynomials.size(); ++j) {
    const auto& poly = scheme.v1_polynomials[j];
    out << "poly " << poly.origin_index << " " << poly.variant_mask << " covered_by "
        << scheme.assignments[scheme.coverage[j]] << "\n";
  }
  return out.str();
}

}  // namespace sparseconv
