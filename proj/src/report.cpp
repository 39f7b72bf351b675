#include "sparseconv/report.hpp"

#include <cstdio>

namespace sparseconv {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

const char* mode_name(ConvMode mode) {
  switch (mode) {
    case ConvMode::kFast:
      return "fast";
    case ConvMode::kNaive:
      return "naive";
    case ConvMode::kVerify:
      return "verify";
  }
  return "unknown";
}

}  // namespace

void RunReport::add(const std::string& key, const std::string& value) {
  fields.emplace_back(key, value);
}
void RunReport::add(const std::string& key, u64 value) { add(key, std::to_string(value)); }
void RunReport::add(const std::string& key, i64 value) { add(key, std::to_string(value)); }
void RunReport::add(const std::string& key, unsigned value) { add(key, std::to_string(value)); }
void RunReport::add_ms(const std::string& key, double ms) { add(key, fixed(ms, 3)); }
void RunReport::add_fraction(const std::string& key, double f) { add(key, fixed(f, 6)); }

std::string RunReport::to_text() const {
  std::string out;
  for (const auto& [key, value] : fields) {
    out += key;
    out += ": ";
    out += value;
    out += '\n';
  }
  return out;
}

RunReport make_run_report(const ConvOutcome& outcome, const SparseVector& v1,
                          const SparseVector& v2, ConvMode mode) {
  RunReport r;
  r.add("mode", mode_name(mode));
  r.add("length1", v1.length);
  r.add("length2", v2.length);
  r.add("n1", v1.nnz());
  r.add("n2", v2.nnz());
  r.add("used_fast", u64{outcome.used_fast});
  r.add("compacted", u64{outcome.compaction.has_value()});
  if (outcome.compaction) {
    const CompactionResult& c = *outcome.compaction;
    r.add("compaction_prime", c.p);
    r.add("compaction_rounds", u64{c.rounds});
    r.add("compaction_pool_primes", c.pool_size);
    r.add("compaction_pool_bits", c.q_bits);
    r.add("compaction_diff_bits", c.d_bits);
  }
  if (outcome.scheme) {
    r.add("c", outcome.scheme->c);
    r.add("q", outcome.scheme->q);
    r.add("assignments", outcome.scheme->assignments);
  }
  if (outcome.report) {
    const RecoveryReport& rep = *outcome.report;
    r.add("assignments_used", rep.assignments_used);
    r.add("pairs_total", rep.pairs_total);
    r.add("pairs_accounted", rep.pairs_accounted);
    r.add("fallback_pairs", rep.fallback_pairs);
    const std::size_t total_outputs = outcome.w.nnz();
    const std::size_t from_fallback = rep.fallback_outputs.size();
    r.add("output_nnz", total_outputs);
    r.add("outputs_recovered", total_outputs - from_fallback);
    r.add("outputs_fallback", from_fallback);
    r.add_fraction("fallback_fraction",
                   total_outputs == 0 ? 0.0 : double(from_fallback) / double(total_outputs));
  } else {
    r.add("output_nnz", outcome.w.nnz());
  }
  r.add("verified", u64{outcome.verified});
  if (outcome.report) {
    const PhaseTimings& t = outcome.report->timings;
    r.add_ms("time_preprocess_ms", t.scheme_ms);
    r.add_ms("time_reduce_ms", t.reduce_ms);
    r.add_ms("time_correlate_ms", t.correlate_ms);
    r.add_ms("time_recover_ms", t.extract_ms);
    r.add_ms("time_fallback_ms", t.fallback_ms);
    r.add_ms("time_total_ms", t.total_ms);
  }
  return r;
}

}  // namespace sparseconv
