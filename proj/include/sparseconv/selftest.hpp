#pragma once

// Seeded invariant suites behind the selftest subcommand: polynomial
// encoding lemmas, singleton-table bounds, oracle equivalence of the fast
// pipeline, and compaction soundness. Each suite reports its first failing
// property together with the seed that produced it.

#include <string>
#include <vector>

#include "sparseconv/int128.hpp"

namespace sparseconv {

struct SelftestOptions {
  u64 base_seed = 1;
  std::size_t seeds = 3;                   // instances per (suite, size)
  std::vector<std::size_t> sizes = {8, 16, 32};  // support sizes exercised
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;  // individual property checks executed
  std::string detail;      // failing property and seed, empty when passed
};

std::vector<SuiteResult> run_selftests(const SelftestOptions& options);

}  // namespace sparseconv
