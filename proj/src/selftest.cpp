#include "sparseconv/selftest.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "sparseconv/conv_engine.hpp"
#include "sparseconv/errors.hpp"
#include "sparseconv/exp_compaction.hpp"
#include "sparseconv/instance_gen.hpp"
#include "sparseconv/poly_encode.hpp"
#include "sparseconv/primality.hpp"
#include "sparseconv/reduction_scheme.hpp"

namespace sparseconv {
namespace {

struct SuiteRun {
  SuiteResult result;

  explicit SuiteRun(std::string name) { result.name = std::move(name); }

  bool check(bool ok, const char* property, u64 seed) {
    ++result.checks;
    if (!ok && result.passed) {
      result.passed = false;
      result.detail = std::string(property) + " (seed " + std::to_string(seed) + ")";
    }
    return ok;
  }
};

u64 ceil_log2(u64 n) {
  u64 bits = 0;
  while ((u64{1} << bits) < n) ++bits;
  return bits;
}

// ---- suite 1: polynomial encoding lemmas ------------------------------

EncodingParams draw_params(std::mt19937_64& rng, unsigned c) {
  const u64 lo = u64{1} << (4 + c);
  const u64 q = next_prime(lo + bounded_rand(rng, lo));
  return EncodingParams::make(q, c);
}

SuiteResult suite_poly_lemmas(const SelftestOptions& opt) {
  SuiteRun run("poly_lemmas");
  for (std::size_t si = 0; si < opt.seeds && run.result.passed; ++si) {
    const u64 seed = opt.base_seed + si;
    std::mt19937_64 rng(seed);
    for (unsigned c = 1; c <= 3 && run.result.passed; ++c) {
      const EncodingParams params = draw_params(rng, c);
      const u64 half = params.max_encodable() / 2;

      // Alignment: the raw digit-wise sum of two base polynomials matches
      // exactly one variant of the sum's base polynomial, the one the
      // carry mask predicts. Digits and variant coefficients are compared
      // as integers.
      for (int rep = 0; rep < 200 && run.result.passed; ++rep) {
        const u64 i = bounded_rand(rng, half);
        const u64 j = bounded_rand(rng, half);
        const IndexPolynomial bi = encode_base(i, params);
        const IndexPolynomial bj = encode_base(j, params);
        const auto variants = make_variants(encode_base(i + j, params), params);
        unsigned matches = 0;
        unsigned matched_mask = 0;
        for (const auto& v : variants) {
          bool equal = true;
          for (unsigned k = 0; k < params.digits(); ++k) {
            const i64 raw = i64(bi.coeffs[k]) + i64(bj.coeffs[k]);
            if (raw != coeff_as_integer(v.coeffs[k], params)) equal = false;
          }
          if (equal) {
            ++matches;
            matched_mask = v.variant_mask;
          }
        }
        run.check(matches == 1, "alignment: exactly one variant matches the digit sum", seed);
        run.check(matched_mask == aligned_variant_of_sum(i, j, params),
                  "alignment: carry mask predicts the matching variant", seed);
        for (const auto& v : variants)
          run.check(decode_integer(v, params) == i128(i + j),
                    "variants decode back to their origin index", seed);
      }

      // Collision bound: two distinct polynomials of degree <= c agree on
      // at most c points of F_q.
      for (int rep = 0; rep < 100 && run.result.passed; ++rep) {
        const u64 i = bounded_rand(rng, params.max_encodable());
        u64 j = bounded_rand(rng, params.max_encodable());
        while (j == i) j = bounded_rand(rng, params.max_encodable());
        const auto vi = make_variants(encode_base(i, params), params);
        const auto vj = make_variants(encode_base(j, params), params);
        const IndexPolynomial& p1 = vi[bounded_rand(rng, vi.size())];
        const IndexPolynomial& p2 = vj[bounded_rand(rng, vj.size())];
        u64 agree = 0;
        for (u64 a = 0; a < params.q; ++a)
          if (evaluate(p1, a, params) == evaluate(p2, a, params)) ++agree;
        run.check(agree <= c, "collision bound: distinct polynomials agree on <= c points",
                  seed);
      }

      // Sibling exclusion: two variants of one index evaluate equal at a
      // exactly when a is in the precomputed bad-value set.
      const std::vector<u64> bad = sibling_bad_values(params);
      u64 pow3 = 1;
      for (unsigned t = 0; t < c; ++t) pow3 *= 3;
      run.check(bad.size() <= u64(c) * pow3, "sibling bad set within the c*3^c bound", seed);
      const u64 origin = bounded_rand(rng, params.max_encodable());
      const auto variants = make_variants(encode_base(origin, params), params);
      for (u64 a = 0; a < params.q && run.result.passed; ++a) {
        bool collides = false;
        for (std::size_t x = 0; x < variants.size() && !collides; ++x)
          for (std::size_t y = x + 1; y < variants.size() && !collides; ++y)
            if (evaluate(variants[x], a, params) == evaluate(variants[y], a, params))
              collides = true;
        const bool in_bad = std::binary_search(bad.begin(), bad.end(), a);
        run.check(collides == in_bad, "sibling bad set matches direct variant collisions",
                  seed);
      }
    }
  }
  return run.result;
}

// ---- suite 2: singleton table and greedy selection bounds -------------

SuiteResult suite_table_bounds(const SelftestOptions& opt) {
  SuiteRun run("table_bounds");
  for (std::size_t si = 0; si < opt.seeds && run.result.passed; ++si) {
    const u64 seed = opt.base_seed + 1000 + si;
    for (std::size_t n1 : opt.sizes) {
      if (!run.result.passed) break;
      std::mt19937_64 rng(seed * 7919 + n1);
      InstanceSpec spec;
      // Alternate between a short range (degree 1 suffices) and a long
      // one that needs more digits.
      spec.length = si % 2 == 0 ? u64(n1) * n1 * 2 : u64(n1) << 14;
      spec.nnz = n1;
      const SparseVector v1 = random_sparse_vector(rng, spec);
      const ReductionScheme scheme = build_scheme(v1);
      const EncodingParams& params = scheme.params;

      run.check(scheme.v1_polynomials.size() == v1.nnz() * params.variants_per_index(),
                "table: 2^c variants per distinct index", seed);

      const auto candidates = candidate_assignments(params, scheme.v1_polynomials);
      const SingletonTable table =
          build_singleton_table(scheme.v1_polynomials, candidates, params);
      const u64 row_budget = u64(params.c) * params.variants_per_index() * v1.nnz();
      for (std::size_t col = 0; col < table.cols; ++col) {
        const std::size_t trues = table.count_true(col);
        run.check(table.rows - trues <= row_budget,
                  "table: multiple-row count per column within c*2^c*n1", seed);
        run.check(2 * trues >= table.rows, "table: every column at least half singletons",
                  seed);
        if (!run.result.passed) break;
      }

      const u64 bound = ceil_log2(params.variants_per_index() * v1.nnz());
      run.check(scheme.assignments.size() <= bound,
                "selection: assignment count within ceil(log2(2^c*n1))", seed);

      // Independent coverage recheck: under its covering assignment every
      // polynomial must be alone at its position.
      for (std::size_t j = 0; j < scheme.v1_polynomials.size() && run.result.passed; ++j) {
        const u64 a = scheme.assignments.at(scheme.coverage[j]);
        const u64 pos = evaluate(scheme.v1_polynomials[j], a, params);
        std::size_t sharers = 0;
        for (const auto& p : scheme.v1_polynomials)
          if (evaluate(p, a, params) == pos) ++sharers;
        run.check(sharers == 1, "selection: covered polynomial is a singleton", seed);
      }
    }
  }
  return run.result;
}

// ---- suite 3: oracle equivalence of the fast pipeline -----------------

SuiteResult suite_oracle_equiv(const SelftestOptions& opt) {
  SuiteRun run("oracle_equiv");
  for (std::size_t si = 0; si < opt.seeds && run.result.passed; ++si) {
    const u64 seed = opt.base_seed + 2000 + si;
    for (std::size_t n1 : opt.sizes) {
      if (!run.result.passed) break;
      std::mt19937_64 rng(seed * 104729 + n1);

      InstanceSpec s1;
      s1.length = u64(n1) * (2 + bounded_rand(rng, u64(n1) * 16));
      s1.nnz = n1;
      if (si % 2 == 1) s1.value_min = 1;  // alternate signed / nonnegative
      InstanceSpec s2 = s1;
      s2.nnz = std::max<std::size_t>(1, n1 / 2);
      s2.length = s1.length + bounded_rand(rng, s1.length);  // exercises the drop rule
      const SparseVector v1 = random_sparse_vector(rng, s1);
      const SparseVector v2 = random_sparse_vector(rng, s2);

      const ReductionScheme scheme = build_scheme(v1);
      EngineConfig config;
      config.keep_correlations = true;
      const FastResult fast = fast_sparse_convolution(v1, v2, scheme, config);
      const SparseVector oracle = brute_convolution(v1, v2);
      run.check(fast.w == oracle, "fast pipeline equals the brute oracle", seed);
      run.check(fast.report.pairs_accounted + fast.report.fallback_pairs ==
                    fast.report.pairs_total,
                "pair accounting is complete", seed);

      // Channel invariants over the kept correlations.
      i64 n2_eff = 0;
      i64 sum1 = 0, sum2 = 0;
      for (const auto& e : v1.entries) sum1 += e.value;
      for (const auto& e : v2.entries)
        if (e.index <= v1.max_index()) {
          sum2 += e.value;
          ++n2_eff;
        }
      const i128 vpi = i128(scheme.params.variants_per_index());
      for (const auto& corr : fast.report.correlations) {
        i128 cnt_total = 0, val_total = 0;
        for (u64 s = 0; s < scheme.params.q; ++s) {
          const i128 cnt = corr.cnt[s];
          run.check(cnt >= 0, "count channel is nonnegative", seed);
          cnt_total += cnt;
          val_total += corr.val[s];
          if (cnt > 0)
            run.check(corr.k2[s] * cnt >= corr.k1[s] * corr.k1[s],
                      "index moments satisfy Cauchy-Schwarz", seed);
        }
        run.check(cnt_total == vpi * i128(v1.nnz()) * i128(n2_eff),
                  "count channel sums to 2^c*n1*n2", seed);
        run.check(val_total == vpi * i128(sum1) * i128(sum2),
                  "value channel sums to 2^c * sum(v1) * sum(v2)", seed);
        if (!run.result.passed) break;
      }

      // Dense baseline agrees when the transform stays small.
      if (v1.length + v2.length <= (u64{1} << 16)) {
        run.check(dense_convolution(v1, v2) == oracle, "dense baseline equals the oracle",
                  seed);
      }

      // End-to-end dispatch with internal scheme construction.
      const ConvOutcome outcome = verified_convolution(v1, v2, ConvMode::kVerify);
      run.check(outcome.verified && outcome.w == oracle,
                "verify mode reproduces the oracle", seed);
    }
  }
  return run.result;
}

// ---- suite 4: compaction soundness ------------------------------------

SuiteResult suite_compaction(const SelftestOptions& opt) {
  SuiteRun run("compaction_soundness");
  std::map<std::size_t, PrimePool> pools;  // per size; generation dominates
  for (std::size_t si = 0; si < opt.seeds && run.result.passed; ++si) {
    const u64 seed = opt.base_seed + 3000 + si;
    for (std::size_t size : opt.sizes) {
      if (!run.result.passed) break;
      const std::size_t n1 = std::min<std::size_t>(size, 64);
      std::mt19937_64 rng(seed * 15485863 + n1);

      // Full 64-bit index spread; values stay small.
      std::set<u64> idx1;
      while (idx1.size() < n1) idx1.insert(rng() >> 1);
      std::set<u64> idx2;
      while (idx2.size() < std::max<std::size_t>(1, n1 / 2)) {
        if (bounded_rand(rng, 2) == 0 && !idx1.empty()) {
          auto it = idx1.begin();
          std::advance(it, bounded_rand(rng, idx1.size()));
          idx2.insert(*it);
        } else {
          idx2.insert(rng() >> 1);
        }
      }
      auto to_vec = [&](const std::set<u64>& idx) {
        SparseVector v;
        v.length = *idx.rbegin() + 1;
        for (u64 i : idx)
          v.entries.push_back({i, i64(1 + bounded_rand(rng, 50))});
        return v;
      };
      const SparseVector v1 = to_vec(idx1);
      const SparseVector v2 = to_vec(idx2);

      auto pool_it = pools.find(n1);
      if (pool_it == pools.end()) pool_it = pools.emplace(n1, build_prime_pool(n1)).first;
      const PrimePool& pool = pool_it->second;
      run.check(pool.primes.size() == u64(n1) * n1 * n1 + 1, "pool holds n1^3+1 primes",
                seed);

      std::vector<u64> union_idx(idx1.begin(), idx1.end());
      union_idx.insert(union_idx.end(), idx2.begin(), idx2.end());
      std::sort(union_idx.begin(), union_idx.end());
      union_idx.erase(std::unique(union_idx.begin(), union_idx.end()), union_idx.end());

      const GoodPrime good = find_good_prime(union_idx, pool);
      run.check(is_prime(good.p), "selected compaction value is prime", seed);
      run.check(std::binary_search(pool.primes.begin(), pool.primes.end(), good.p),
                "selected prime comes from the pool", seed);
      bool divides_none = true;
      for (std::size_t x = 0; x < union_idx.size(); ++x)
        for (std::size_t y = x + 1; y < union_idx.size(); ++y)
          if ((union_idx[y] - union_idx[x]) % good.p == 0) divides_none = false;
      run.check(divides_none, "selected prime divides no pairwise difference", seed);
      run.check(good.rounds <= ceil_log2(pool.primes.size()),
                "halving rounds within ceil(log2(pool))", seed);

      const CompactOutcome co = compact(v1, v2, pool);
      run.check(co.v1.length == co.info.p && co.v2.length == co.info.p,
                "compacted vectors have length p", seed);
      run.check(co.v1.nnz() == v1.nnz() && co.v2.nnz() == v2.nnz(),
                "compaction preserves every non-zero", seed);
      std::unordered_set<u64> mapped;
      for (const auto& [orig, red] : co.info.index_map) {
        run.check(red == orig % co.info.p, "compaction maps by reduction mod p", seed);
        mapped.insert(red);
      }
      run.check(mapped.size() == union_idx.size(), "compaction is injective on the union",
                seed);

      // End-to-end: the dispatcher must reach for compaction on these
      // indices and still match the oracle (in compacted space). One run
      // per size; the internal pool rebuild is the slow part.
      if (si == 0) {
        const ConvOutcome outcome = verified_convolution(v1, v2, ConvMode::kVerify);
        run.check(outcome.compaction.has_value(), "dispatcher compacts 64-bit indices",
                  seed);
        run.check(outcome.verified, "compacted convolution matches its oracle", seed);
      }
    }
  }
  return run.result;
}

}  // namespace

std::vector<SuiteResult> run_selftests(const SelftestOptions& options) {
  return {suite_poly_lemmas(options), suite_table_bounds(options),
          suite_oracle_equiv(options), suite_compaction(options)};
}

}  // namespace sparseconv
