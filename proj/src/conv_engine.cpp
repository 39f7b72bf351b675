#include "sparseconv/conv_engine.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>

#include "sparseconv/errors.hpp"
#include "sparseconv/ntt.hpp"

namespace sparseconv {
namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

constexpr u128 kU128Max = ~u128{0};

u128 sat_mul(u128 a, u128 b) {
  if (a != 0 && b > kU128Max / a) return kU128Max;
  return a * b;
}

i64 to_i64_checked(i128 v, const char* what) {
  if (v > i128(std::numeric_limits<i64>::max()) || v < i128(std::numeric_limits<i64>::min()))
    throw BoundError(std::string(what) + " exceeds the 64-bit value range");
  return i64(v);
}

// v2 entries above v1's largest index satisfy i1 >= i2 for no i1, so they
// contribute to no output; dropping them keeps every surviving v2 index
// encodable whenever v1's are.
SparseVector effective_v2(const SparseVector& v1, const SparseVector& v2) {
  SparseVector out;
  out.length = v2.length;
  if (v1.nnz() == 0) return out;
  const u64 cap = v1.max_index();
  for (const auto& e : v2.entries) {
    if (e.index > cap) break;
    out.entries.push_back(e);
  }
  return out;
}

i64 ordered_pair_count(const SparseVector& v1, const SparseVector& v2) {
  i64 m = 0;
  std::size_t lb = 0;  // both entry lists ascend, so the bound only moves right
  for (const auto& e2 : v2.entries) {
    while (lb < v1.entries.size() && v1.entries[lb].index < e2.index) ++lb;
    m += i64(v1.entries.size() - lb);
  }
  return m;
}

// Everything the correlation channels can sum must stay below the exact
// reconstruction range, and the per-position bundle channels below 2^63.
void check_budgets(const SparseVector& v1, const SparseVector& v2, const EncodingParams& params,
                   const EngineConfig& config) {
  const u64 bound = config.value_bound > 0 ? u64(config.value_bound) : 0;
  const u64 mv1 = v1.max_abs_value();
  const u64 mv2 = v2.max_abs_value();
  if (mv1 > bound || mv2 > bound) throw BoundError("input value exceeds the configured bound");
  const u64 max_idx = v1.nnz() ? v1.max_index() : 0;
  const u128 contribs = sat_mul(sat_mul(params.variants_per_index(), v1.nnz()), v2.nnz());
  if (contribs >= (u128{1} << 62)) throw BoundError("pair count exceeds the accounting range");
  const u128 term = std::max({sat_mul(mv1, mv2), sat_mul(max_idx, max_idx), u128{1}});
  if (sat_mul(contribs, term) > u128(max_exact_magnitude()))
    throw BoundError("correlation magnitude budget exceeded; compact indices or shrink values");
  if (sat_mul(sat_mul(params.variants_per_index(), v1.nnz()), std::max<u64>(mv1, 1)) >=
          (u128{1} << 62) ||
      sat_mul(v2.nnz(), std::max<u64>(mv2, 1)) >= (u128{1} << 62))
    throw BoundError("per-position channel sums exceed the 64-bit range");
}

struct Channels {
  std::vector<i128> val, cnt, k1, k2;
};

std::vector<i128> widen(const std::vector<i64>& v) {
  return std::vector<i128>(v.begin(), v.end());
}

// Fold a linear correlation (indexed by shift d = t - (q-1)) back onto the
// cycle: offset s collects shifts d = s and d = s - q.
std::vector<i128> fold_cyclic(const std::vector<i128>& lin, u64 q) {
  std::vector<i128> out(q);
  for (u64 s = 0; s < q; ++s) out[s] = lin[s + q - 1] + (s >= 1 ? lin[s - 1] : i128{0});
  return out;
}

// All four channels of one assignment. A pair landing at offset s = x1 - x2
// (mod q) adds value1*value2, 1, i1-i2 and (i1-i2)^2 respectively.
Channels correlate_bundles(const ReducedBundle& b1, const ReducedBundle& b2, u64 q,
                           const NttPlan* plan) {
  Channels ch;
  if (plan == nullptr) {
    auto corr = [q](const auto& a, const auto& b) {
      std::vector<i128> c(q, 0);
      for (u64 s = 0; s < q; ++s) {
        i128 acc = 0;
        for (u64 m = 0; m < q; ++m) acc += i128(a[(s + m) % q]) * i128(b[m]);
        c[s] = acc;
      }
      return c;
    };
    ch.val = corr(b1.value_vec, b2.value_vec);
    ch.cnt = corr(b1.count_vec, b2.count_vec);
    const auto idx_cnt = corr(b1.idx_vec, b2.count_vec);
    const auto cnt_idx = corr(b1.count_vec, b2.idx_vec);
    const auto idx2_cnt = corr(b1.idx2_vec, b2.count_vec);
    const auto idx_idx = corr(b1.idx_vec, b2.idx_vec);
    const auto cnt_idx2 = corr(b1.count_vec, b2.idx2_vec);
    ch.k1.resize(q);
    ch.k2.resize(q);
    for (u64 s = 0; s < q; ++s) {
      ch.k1[s] = idx_cnt[s] - cnt_idx[s];
      ch.k2[s] = idx2_cnt[s] - 2 * idx_idx[s] + cnt_idx2[s];
    }
    return ch;
  }
  // Batched transform path: 8 forwards and 4 inverses instead of the 21
  // transforms the seven pairwise correlations would cost naively.
  FreqVec f_val = plan->forward(widen(b1.value_vec));
  FreqVec f_cnt = plan->forward(widen(b1.count_vec));
  FreqVec f_idx = plan->forward(b1.idx_vec);
  FreqVec f_idx2 = plan->forward(b1.idx2_vec);
  FreqVec g_val = plan->forward_reversed(widen(b2.value_vec));
  FreqVec g_cnt = plan->forward_reversed(widen(b2.count_vec));
  FreqVec g_idx = plan->forward_reversed(b2.idx_vec);
  FreqVec g_idx2 = plan->forward_reversed(b2.idx2_vec);

  FreqVec a_val, a_cnt, a_k1, a_k2;
  plan->multiply_add(a_val, f_val, g_val, 1);
  plan->multiply_add(a_cnt, f_cnt, g_cnt, 1);
  plan->multiply_add(a_k1, f_idx, g_cnt, 1);
  plan->multiply_add(a_k1, f_cnt, g_idx, -1);
  plan->multiply_add(a_k2, f_idx2, g_cnt, 1);
  plan->multiply_add(a_k2, f_idx, g_idx, -2);
  plan->multiply_add(a_k2, f_cnt, g_idx2, 1);
  f_val = {};
  f_cnt = {};
  f_idx = {};
  f_idx2 = {};
  g_val = {};
  g_cnt = {};
  g_idx = {};
  g_idx2 = {};
  ch.val = fold_cyclic(plan->inverse(std::move(a_val)), q);
  ch.cnt = fold_cyclic(plan->inverse(std::move(a_cnt)), q);
  ch.k1 = fold_cyclic(plan->inverse(std::move(a_k1)), q);
  ch.k2 = fold_cyclic(plan->inverse(std::move(a_k2)), q);
  return ch;
}

struct Candidate {
  u64 k = 0;
  i128 value = 0;
  i64 pairs = 0;
};

// Offsets whose contributions all share one output index k let us read
// W[k] off the value channel. The tests, in order: some contribution
// exists; the mean output index is a nonnegative integer no larger than
// any real output (which also keeps khat*k1 inside 128 bits); the second
// moment certifies zero variance; and s is k's own position under this
// assignment, not a stray echo of the misaligned variants.
std::vector<Candidate> extract_candidates(const Channels& ch, u64 assignment,
                                          const EncodingParams& params, u64 max_out_index) {
  std::vector<Candidate> out;
  for (u64 s = 0; s < params.q; ++s) {
    const i128 cnt = ch.cnt[s];
    if (cnt <= 0) continue;
    const i128 k1 = ch.k1[s];
    if (k1 < 0 || k1 % cnt != 0) continue;
    const i128 khat = k1 / cnt;
    if (khat > i128(max_out_index)) continue;
    if (ch.k2[s] != khat * k1) continue;  // k2*cnt == k1^2, divided through by cnt
    const u64 k = u64(khat);
    if (evaluate(encode_base(k, params), assignment, params) != s) continue;
    out.push_back({k, ch.val[s], i64(cnt)});
  }
  return out;
}

struct JobOutput {
  Channels channels;
  std::vector<Candidate> candidates;
  double reduce_ms = 0;
  double correlate_ms = 0;
  double extract_ms = 0;
};

void throw_first_difference(const SparseVector& fast, const SparseVector& oracle) {
  const std::size_t n = std::min(fast.entries.size(), oracle.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = fast.entries[i];
    const auto& w = oracle.entries[i];
    if (g.index != w.index)
      throw VerifyMismatch("fast and oracle outputs differ", std::min(g.index, w.index));
    if (g.value != w.value) throw VerifyMismatch("fast and oracle outputs differ", g.index);
  }
  if (fast.entries.size() != oracle.entries.size()) {
    const auto& extra = fast.entries.size() > n ? fast.entries[n] : oracle.entries[n];
    throw VerifyMismatch("fast and oracle outputs differ", extra.index);
  }
}

}  // namespace

SparseVector brute_convolution(const SparseVector& v1, const SparseVector& v2) {
  std::unordered_map<u64, i128> acc;
  acc.reserve(v1.nnz());
  for (const auto& e1 : v1.entries) {
    for (const auto& e2 : v2.entries) {
      if (e2.index > e1.index) break;
      acc[e1.index - e2.index] += i128(e1.value) * i128(e2.value);
    }
  }
  SparseVector w;
  w.length = v1.length;
  w.entries.reserve(acc.size());
  for (const auto& [k, v] : acc)
    if (v != 0) w.entries.push_back({k, to_i64_checked(v, "convolution output")});
  std::sort(w.entries.begin(), w.entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  return w;
}

SparseVector dense_convolution(const SparseVector& v1, const SparseVector& v2,
                               std::size_t length_cap) {
  SparseVector w;
  w.length = v1.length;
  if (v1.nnz() == 0 || v2.nnz() == 0) return w;
  if (v1.length + v2.length - 1 > length_cap)
    throw BoundError("dense transform length exceeds the cap");
  const u128 per_output = sat_mul(std::min(v1.nnz(), v2.nnz()),
                                  sat_mul(v1.max_abs_value(), v2.max_abs_value()));
  if (per_output > u128(max_exact_magnitude()))
    throw BoundError("dense convolution magnitude budget exceeded");
  std::vector<i128> a(v1.length, 0);
  std::vector<i128> b(v2.length, 0);
  for (const auto& e : v1.entries) a[e.index] = e.value;
  for (const auto& e : v2.entries) b[e.index] = e.value;
  // W[j] = sum_i a[j+i]*b[i] = (a conv reverse(b))[j + |b| - 1]
  std::reverse(b.begin(), b.end());
  const std::vector<i128> lin = exact_linear_convolution(a, b);
  for (u64 j = 0; j < v1.length; ++j) {
    const i128 v = lin[j + v2.length - 1];
    if (v != 0) w.entries.push_back({j, to_i64_checked(v, "convolution output")});
  }
  return w;
}

FastResult fast_sparse_convolution(const SparseVector& v1, const SparseVector& v2,
                                   const ReductionScheme& scheme, const EngineConfig& config) {
  Stopwatch total;
  const EncodingParams& params = scheme.params;
  const SparseVector v2e = effective_v2(v1, v2);
  check_budgets(v1, v2e, params, config);

  FastResult result;
  RecoveryReport& rep = result.report;
  rep.pairs_total = ordered_pair_count(v1, v2e);

  const u64 q = params.q;
  std::optional<NttPlan> plan;
  if (q > 64 && v2e.nnz() > 0) plan.emplace(2 * q - 1);
  const u64 max_out_index = v1.nnz() ? v1.max_index() : 0;

  auto run_job = [&](std::size_t t) {
    JobOutput out;
    Stopwatch reduce_sw;
    const ReducedBundle b1 = reduce_v1(v1, scheme, t);
    const ReducedBundle b2 = reduce_v2(v2e, scheme, t);
    out.reduce_ms = reduce_sw.ms();
    Stopwatch corr_sw;
    out.channels = correlate_bundles(b1, b2, q, plan ? &*plan : nullptr);
    out.correlate_ms = corr_sw.ms();
    Stopwatch extract_sw;
    out.candidates = extract_candidates(out.channels, scheme.assignments[t], params,
                                        max_out_index);
    out.extract_ms = extract_sw.ms();
    if (!config.keep_correlations) out.channels = {};
    return out;
  };

  i128 accounted = 0;
  // Consumption is strictly ordinal-ordered and the earliest ordinal wins
  // each output index, so thread count and completion order cannot change
  // any result byte.
  auto consume = [&](std::size_t t, JobOutput&& out) {
    rep.timings.reduce_ms += out.reduce_ms;
    rep.timings.correlate_ms += out.correlate_ms;
    rep.timings.extract_ms += out.extract_ms;
    ++rep.assignments_used;
    for (const Candidate& cd : out.candidates) {
      auto [it, inserted] = rep.recovered.try_emplace(cd.k, RecoveredEntry{cd.value, t, cd.pairs});
      if (inserted) accounted += cd.pairs;
    }
    if (config.keep_correlations) {
      CorrelationSet set;
      set.assignment = scheme.assignments[t];
      set.val = std::move(out.channels.val);
      set.cnt = std::move(out.channels.cnt);
      set.k1 = std::move(out.channels.k1);
      set.k2 = std::move(out.channels.k2);
      rep.correlations.push_back(std::move(set));
    }
    return accounted == rep.pairs_total;
  };

  const std::size_t total_jobs = scheme.assignments.size();
  const unsigned threads = std::max(1u, config.threads);
  bool done = rep.pairs_total == 0;
  if (threads == 1) {
    for (std::size_t t = 0; t < total_jobs && !done; ++t) done = consume(t, run_job(t));
  } else {
    std::size_t next = 0;
    while (next < total_jobs && !done) {
      const std::size_t batch = std::min<std::size_t>(threads, total_jobs - next);
      std::vector<std::future<JobOutput>> futures;
      futures.reserve(batch);
      for (std::size_t b = 0; b < batch; ++b)
        futures.push_back(std::async(std::launch::async, run_job, next + b));
      for (std::size_t b = 0; b < batch; ++b) {
        JobOutput out = futures[b].get();  // join even after an early stop
        if (!done) done = consume(next + b, std::move(out));
      }
      next += batch;
    }
  }
  rep.pairs_accounted = i64(accounted);
  rep.fallback_pairs = rep.pairs_total - rep.pairs_accounted;

  // Exact fallback for every pair the pure offsets missed.
  std::vector<SparseEntry> fb_entries;
  if (rep.fallback_pairs > 0) {
    Stopwatch fb_sw;
    std::unordered_map<u64, i128> acc;
    i64 residual = 0;
    for (const auto& e1 : v1.entries) {
      for (const auto& e2 : v2e.entries) {
        if (e2.index > e1.index) break;
        const u64 k = e1.index - e2.index;
        if (rep.recovered.count(k)) continue;
        acc[k] += i128(e1.value) * i128(e2.value);
        ++residual;
      }
    }
    if (residual != rep.fallback_pairs) throw EngineError("pair accounting mismatch; internal bug");
    for (const auto& [k, v] : acc)
      if (v != 0) fb_entries.push_back({k, to_i64_checked(v, "convolution output")});
    std::sort(fb_entries.begin(), fb_entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    rep.fallback_outputs.reserve(fb_entries.size());
    for (const auto& e : fb_entries) rep.fallback_outputs.push_back(e.index);
    rep.timings.fallback_ms = fb_sw.ms();
  }

  std::vector<SparseEntry> rec_entries;
  for (const auto& [k, e] : rep.recovered)
    if (e.value != 0) rec_entries.push_back({k, to_i64_checked(e.value, "convolution output")});

  result.w.length = v1.length;
  result.w.entries.reserve(rec_entries.size() + fb_entries.size());
  std::merge(rec_entries.begin(), rec_entries.end(), fb_entries.begin(), fb_entries.end(),
             std::back_inserter(result.w.entries),
             [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  rep.timings.total_ms = total.ms();
  return result;
}

ConvOutcome verified_convolution(const SparseVector& v1, const SparseVector& v2, ConvMode mode,
                                 const EngineConfig& config) {
  validate_sparse_vector(v1);
  validate_sparse_vector(v2);
  ConvOutcome out;
  if (mode == ConvMode::kNaive) {
    out.w = brute_convolution(v1, v2);
    return out;
  }

  const SparseVector v2e = effective_v2(v1, v2);
  if (v1.nnz() == 0 || v2e.nnz() == 0) {
    out.w.length = v1.length;
    out.verified = mode == ConvMode::kVerify;  // the oracle is empty too
    return out;
  }

  // Compaction must run first when no (c, q) within the caps encodes the
  // index range, or when the index magnitudes alone blow the exact budget.
  bool needs_compaction = false;
  try {
    const EncodingParams probe =
        choose_parameters(v1.max_index(), std::max<std::size_t>(v1.nnz(), 2), config.scheme);
    const u128 contribs =
        sat_mul(sat_mul(probe.variants_per_index(), v1.nnz()), v2e.nnz());
    if (sat_mul(contribs, sat_mul(v1.max_index(), v1.max_index())) >
        u128(max_exact_magnitude()))
      needs_compaction = true;
  } catch (const ExpCaseNeeded&) {
    needs_compaction = true;
  }

  const SparseVector* a = &v1;
  const SparseVector* b = &v2;
  SparseVector ca, cb;
  if (needs_compaction) {
    if (v1.nnz() > config.exp_cap)
      throw BoundError("compaction pool refused for more than " +
                       std::to_string(config.exp_cap) + " non-zeros; raise the cap explicitly");
    CompactOutcome co = compact(v1, v2);
    out.compaction = co.info;
    ca = std::move(co.v1);
    cb = std::move(co.v2);
    a = &ca;
    b = &cb;
  }

  Stopwatch scheme_sw;
  const ReductionScheme scheme = build_scheme(*a, config.scheme);
  const double scheme_ms = scheme_sw.ms();
  FastResult fast = fast_sparse_convolution(*a, *b, scheme, config);
  fast.report.timings.scheme_ms = scheme_ms;
  fast.report.timings.total_ms += scheme_ms;
  out.w = std::move(fast.w);
  out.used_fast = true;
  out.scheme = SchemeSummary{scheme.params.c, scheme.params.q, scheme.assignments.size()};
  out.report = std::move(fast.report);
  if (mode == ConvMode::kVerify) {
    throw_first_difference(out.w, brute_convolution(*a, *b));
    out.verified = true;
  }
  return out;
}

}  // namespace sparseconv
