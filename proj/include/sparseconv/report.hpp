#pragma once

// Line-oriented "key: value" run reports with a stable key order, so two
// runs can be diffed directly. Wall-clock fields all carry the time_
// prefix; they are the only lines allowed to differ between identical
// runs.

#include <string>
#include <utility>
#include <vector>

#include "sparseconv/conv_engine.hpp"

namespace sparseconv {

struct RunReport {
  std::vector<std::pair<std::string, std::string>> fields;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, u64 value);  // also covers std::size_t
  void add(const std::string& key, i64 value);
  void add(const std::string& key, unsigned value);
  void add_ms(const std::string& key, double ms);       // fixed 3 decimals
  void add_fraction(const std::string& key, double f);  // fixed 6 decimals

  std::string to_text() const;  // "key: value\n" per field, field order
};

// The standard report for one convolution run.
RunReport make_run_report(const ConvOutcome& outcome, const SparseVector& v1,
                          const SparseVector& v2, ConvMode mode);

}  // namespace sparseconv
