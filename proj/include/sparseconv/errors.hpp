#pragma once

#include <stdexcept>
#include <string>

#include "sparseconv/int128.hpp"

namespace sparseconv {

// Input text could not be parsed. `line` is 1-based.
struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& msg, int line_)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// A magnitude or budget limit would be exceeded (index range, value range,
// correlation sums, dense-transform size).
struct BoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No (c, q) within the degree cap encodes the instance's indices; the caller
// should run compaction first.
struct ExpCaseNeeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Verify mode found differing outputs between the fast path and the oracle.
struct VerifyMismatch : std::runtime_error {
  u64 first_index;
  VerifyMismatch(const std::string& msg, u64 first_index_)
      : std::runtime_error(msg), first_index(first_index_) {}
};

// An internal invariant failed; indicates a bug, not bad input.
struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sparseconv
