#pragma once

// Sparse vector model: sorted (index, value) pairs with a declared length,
// plus the bit-exact text serialization used by the CLI and tests.

#include <iosfwd>
#include <string>
#include <vector>

#include "sparseconv/int128.hpp"

namespace sparseconv {

struct SparseEntry {
  u64 index = 0;
  i64 value = 0;
  bool operator==(const SparseEntry&) const = default;
};

// Immutable after construction; entries are sorted strictly ascending by
// index, every index < length, every value != 0.
struct SparseVector {
  u64 length = 0;
  std::vector<SparseEntry> entries;

  bool operator==(const SparseVector&) const = default;

  std::size_t nnz() const { return entries.size(); }
  u64 max_index() const;  // valid only when nnz() > 0
  u64 max_abs_value() const;
  bool contains(u64 index) const;
};

// Throws EngineError if v violates the model invariants.
void validate_sparse_vector(const SparseVector& v);

// Text format: optional '#' comment lines, then "N <length>", then one
// "<index> <value>" line per entry. Input entries may be unordered; zero
// values are dropped; exact duplicate lines are collapsed. Throws ParseError
// (with line number) on malformed lines, index >= length, or duplicate
// indices with conflicting values.
SparseVector parse_sparse_vector(std::istream& in);
SparseVector parse_sparse_vector(const std::string& text);
SparseVector load_sparse_vector(const std::string& path);

// Canonical form: "N <length>\n" then ascending "<index> <value>\n" lines.
// parse(serialize(v)) == v for every valid v.
std::string serialize_sparse_vector(const SparseVector& v);
void write_sparse_vector(std::ostream& out, const SparseVector& v);

}  // namespace sparseconv
