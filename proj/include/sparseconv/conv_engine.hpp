#pragma once

// Output-sensitive sparse convolution.
//
// W[j] = sum_i V1[j+i] * V2[i], indices j in [0, N1). The fast path maps
// indices to length-q vectors through the reduction scheme, correlates
// per-assignment channel vectors, and reads recovered outputs off offsets
// that pass a zero-variance purity test. Pair-count accounting detects
// anything the pure offsets missed; an exact pair-enumeration fallback
// computes the remainder, so the result always equals the brute oracle.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "sparseconv/exp_compaction.hpp"
#include "sparseconv/int128.hpp"
#include "sparseconv/reduction_scheme.hpp"
#include "sparseconv/sparse_vector.hpp"

namespace sparseconv {

struct EngineConfig {
  i64 value_bound = i64{1} << 20;  // largest |value| accepted at entry
  unsigned threads = 1;            // per-assignment job parallelism
  bool keep_correlations = false;  // retain raw channels in the report
  std::size_t exp_cap = 128;       // largest n1 allowed to build a compaction pool
  SchemeConfig scheme;
};

// The four recovery channels of one assignment, indexed by reduced offset
// s in [0, q). For every pair (i1 from v1 via one variant, i2 from v2)
// landing at s: val adds value1*value2, cnt adds 1, k1 adds i1-i2, k2
// adds (i1-i2)^2.
struct CorrelationSet {
  u64 assignment = 0;
  std::vector<i128> val, cnt, k1, k2;
};

struct RecoveredEntry {
  i128 value = 0;
  std::size_t assignment_ordinal = 0;  // smallest ordinal that recovered it
  i64 pair_count = 0;
};

struct PhaseTimings {
  double scheme_ms = 0;     // scheme construction (when done by the engine)
  double reduce_ms = 0;     // bundle construction, summed over jobs
  double correlate_ms = 0;  // channel correlations, summed over jobs
  double extract_ms = 0;    // offset scanning, summed over jobs
  double fallback_ms = 0;
  double total_ms = 0;
};

struct RecoveryReport {
  // Output index -> recovery record, for indices read off pure offsets.
  std::map<u64, RecoveredEntry> recovered;
  // Output indices the exact fallback resolved to a non-zero value.
  std::vector<u64> fallback_outputs;
  i64 pairs_total = 0;      // |{(i1,i2) over supports : i1 >= i2}|
  i64 pairs_accounted = 0;  // covered by accepted offsets
  i64 fallback_pairs = 0;   // pairs_total - pairs_accounted
  std::size_t assignments_used = 0;  // ordinals consumed before early stop
  std::vector<CorrelationSet> correlations;  // filled when requested
  PhaseTimings timings;
};

struct FastResult {
  SparseVector w;
  RecoveryReport report;
};

// Exact O(n1*n2) oracle. W has length N1; zero results are dropped.
SparseVector brute_convolution(const SparseVector& v1, const SparseVector& v2);

// Dense baseline: both vectors expanded to dense arrays and convolved by
// a full-length exact transform. Refuses transform lengths beyond the cap.
SparseVector dense_convolution(const SparseVector& v1, const SparseVector& v2,
                               std::size_t length_cap = std::size_t{1} << 24);

// The fast pipeline over a prebuilt scheme. The scheme must have been
// built for v1's support; v2 entries with indices above v1's largest
// (which can contribute to no output) are ignored.
FastResult fast_sparse_convolution(const SparseVector& v1, const SparseVector& v2,
                                   const ReductionScheme& scheme, const EngineConfig& config = {});

enum class ConvMode { kFast, kNaive, kVerify };

struct SchemeSummary {
  unsigned c = 0;
  u64 q = 0;
  std::size_t assignments = 0;
};

struct ConvOutcome {
  SparseVector w;
  bool used_fast = false;
  bool verified = false;  // fast result compared equal to the oracle
  // Set when index compaction ran first. The result (and the oracle it
  // is verified against) then lives in the compacted index space of
  // length info.p.
  std::optional<CompactionResult> compaction;
  std::optional<SchemeSummary> scheme;
  std::optional<RecoveryReport> report;
};

// Mode dispatch used by the CLI. Fast and verify modes build the scheme
// internally; when the index range defeats the polynomial encoding (or
// the magnitude budget), compaction runs first and the outcome is in
// compacted space. Verify mode additionally runs the oracle on the same
// inputs and throws VerifyMismatch on any difference.
ConvOutcome verified_convolution(const SparseVector& v1, const SparseVector& v2, ConvMode mode,
                                 const EngineConfig& config = {});

}  // namespace sparseconv
