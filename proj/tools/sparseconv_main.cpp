// Command-line front end: file-driven convolution, scheme inspection,
// index compaction, seeded self-tests, and a benchmark harness.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sparseconv/conv_engine.hpp"
#include "sparseconv/errors.hpp"
#include "sparseconv/exp_compaction.hpp"
#include "sparseconv/instance_gen.hpp"
#include "sparseconv/report.hpp"
#include "sparseconv/selftest.hpp"
#include "sparseconv/sparse_vector.hpp"

namespace {

using namespace sparseconv;

// All file output goes through a temp file plus rename, so a failing run
// never leaves a partial file behind.
void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw std::runtime_error("write failed for " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot move output into " + path);
  }
}

ConvMode parse_mode(const std::string& mode) {
  if (mode == "fast") return ConvMode::kFast;
  if (mode == "naive") return ConvMode::kNaive;
  if (mode == "verify") return ConvMode::kVerify;
  throw std::runtime_error("unknown mode '" + mode + "' (expected fast, naive or verify)");
}

struct CommonArgs {
  std::string v1_path, v2_path, out_path, report_path;
  std::string mode = "fast";
  unsigned threads = 1;
  u64 force_q = 0;
  unsigned force_c = 0;
  std::size_t exp_cap = 128;
};

EngineConfig engine_config(const CommonArgs& args) {
  EngineConfig config;
  config.threads = args.threads;
  config.exp_cap = args.exp_cap;
  config.scheme.forced_q = args.force_q;
  config.scheme.forced_c = args.force_c;
  return config;
}

int cmd_conv(const CommonArgs& args) {
  const ConvMode mode = parse_mode(args.mode);
  const SparseVector v1 = load_sparse_vector(args.v1_path);
  const SparseVector v2 = load_sparse_vector(args.v2_path);
  const ConvOutcome outcome = verified_convolution(v1, v2, mode, engine_config(args));
  const std::string w_text = serialize_sparse_vector(outcome.w);
  if (args.out_path.empty())
    std::cout << w_text;
  else
    write_file_atomic(args.out_path, w_text);
  if (!args.report_path.empty())
    write_file_atomic(args.report_path, make_run_report(outcome, v1, v2, mode).to_text());
  return 0;
}

int cmd_reduce(const CommonArgs& args) {
  const SparseVector v1 = load_sparse_vector(args.v1_path);
  SchemeConfig config;
  config.forced_q = args.force_q;
  config.forced_c = args.force_c;
  const ReductionScheme scheme = build_scheme(v1, config);
  std::cout << scheme_debug_dump(scheme);
  std::vector<std::size_t> per_assignment(scheme.assignments.size(), 0);
  for (std::uint32_t ord : scheme.coverage) ++per_assignment.at(ord);
  std::cout << "polynomials: " << scheme.v1_polynomials.size() << "\n";
  std::cout << "assignments_selected: " << scheme.assignments.size() << "\n";
  for (std::size_t t = 0; t < scheme.assignments.size(); ++t)
    std::cout << "covered_by " << scheme.assignments[t] << ": " << per_assignment[t]
              << " polynomials\n";
  return 0;
}

struct CompactArgs {
  std::string v1_path, v2_path, out_v1, out_v2, report_path;
  std::vector<u64> debug_pool;
  std::size_t exp_cap = 128;
};

int cmd_compact(const CompactArgs& args) {
  const SparseVector v1 = load_sparse_vector(args.v1_path);
  const SparseVector v2 = load_sparse_vector(args.v2_path);
  CompactOutcome outcome;
  if (!args.debug_pool.empty()) {
    outcome = compact(v1, v2, make_pool(args.debug_pool));
  } else {
    if (v1.nnz() > args.exp_cap)
      throw BoundError("compaction pool refused for more than " + std::to_string(args.exp_cap) +
                       " non-zeros; raise --exp-cap explicitly");
    outcome = compact(v1, v2);
  }
  write_file_atomic(args.out_v1, serialize_sparse_vector(outcome.v1));
  write_file_atomic(args.out_v2, serialize_sparse_vector(outcome.v2));
  RunReport report;
  report.add("compaction_prime", outcome.info.p);
  report.add("compaction_rounds", u64{outcome.info.rounds});
  report.add("compaction_pool_primes", outcome.info.pool_size);
  report.add("compaction_pool_bits", outcome.info.q_bits);
  report.add("compaction_diff_bits", outcome.info.d_bits);
  report.add("union_indices", outcome.info.index_map.size());
  const std::string text = report.to_text();
  if (args.report_path.empty())
    std::cout << text;
  else
    write_file_atomic(args.report_path, text);
  return 0;
}

struct SelftestArgs {
  u64 seed = 1;
  std::size_t seeds = 3;
  std::vector<std::size_t> sizes = {8, 16, 32};
};

int cmd_selftest(const SelftestArgs& args) {
  SelftestOptions options;
  options.base_seed = args.seed;
  options.seeds = args.seeds;
  if (!args.sizes.empty()) options.sizes = args.sizes;
  const std::vector<SuiteResult> results = run_selftests(options);
  bool all_passed = true;
  for (const SuiteResult& r : results) {
    if (r.passed) {
      std::cout << "[selftest] " << r.name << ": pass (" << r.checks << " checks)\n";
    } else {
      all_passed = false;
      std::cout << "[selftest] " << r.name << ": FAIL: " << r.detail << "\n";
    }
  }
  return all_passed ? 0 : 4;
}

struct BenchArgs {
  std::size_t n1 = 1024;
  u64 length1 = u64{1} << 22;
  std::size_t n2 = 256;
  double density = 0;  // overrides n1 when positive
  std::size_t reps = 5;
  u64 seed = 1;
  unsigned threads = 1;
  i64 vmin = -100;
  i64 vmax = 100;
  std::string report_path;
};

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return xs[xs.size() / 2];
}

int cmd_bench(const BenchArgs& args) {
  std::size_t n1 = args.n1;
  if (args.density > 0)
    n1 = std::max<std::size_t>(1, std::size_t(double(args.length1) * args.density));
  if (n1 > args.length1 || args.n2 > args.length1)
    throw BoundError("support larger than the vector length");
  if (args.reps == 0) throw BoundError("at least one repetition required");

  EngineConfig config;
  config.threads = args.threads;

  std::vector<double> naive_ms, dense_ms, fast_ms;
  std::vector<RunReport> fast_reports;
  for (std::size_t rep = 0; rep < args.reps; ++rep) {
    std::mt19937_64 rng(args.seed + rep);
    InstanceSpec s1;
    s1.length = args.length1;
    s1.nnz = n1;
    s1.value_min = args.vmin;
    s1.value_max = args.vmax;
    InstanceSpec s2 = s1;
    s2.nnz = args.n2;
    const SparseVector v1 = random_sparse_vector(rng, s1);
    const SparseVector v2 = random_sparse_vector(rng, s2);

    const auto t0 = std::chrono::steady_clock::now();
    const SparseVector naive = brute_convolution(v1, v2);
    const auto t1 = std::chrono::steady_clock::now();
    const SparseVector dense = dense_convolution(v1, v2);
    const auto t2 = std::chrono::steady_clock::now();
    const ConvOutcome fast = verified_convolution(v1, v2, ConvMode::kFast, config);
    const auto t3 = std::chrono::steady_clock::now();

    // Piggybacked verification: all three paths must agree exactly.
    if (!(naive == dense))
      throw VerifyMismatch("dense baseline disagrees with the oracle",
                           naive.nnz() ? naive.entries[0].index : 0);
    if (!(fast.w == naive))
      throw VerifyMismatch("fast path disagrees with the oracle",
                           naive.nnz() ? naive.entries[0].index : 0);

    using fms = std::chrono::duration<double, std::milli>;
    naive_ms.push_back(fms(t1 - t0).count());
    dense_ms.push_back(fms(t2 - t1).count());
    fast_ms.push_back(fms(t3 - t2).count());
    fast_reports.push_back(make_run_report(fast, v1, v2, ConvMode::kFast));
  }

  RunReport out;
  out.add("bench_n1", n1);
  out.add("bench_length1", args.length1);
  out.add("bench_n2", args.n2);
  out.add("bench_reps", args.reps);
  out.add("bench_seed", args.seed);
  out.add("bench_threads", u64{args.threads});
  out.add("agreement", std::string("ok"));
  out.add("single_sample", u64{args.reps == 1});
  out.add_ms("naive_median_ms", median(naive_ms));
  out.add_ms("dense_median_ms", median(dense_ms));
  out.add_ms("fast_median_ms", median(fast_ms));
  out.add_fraction("fast_vs_naive_speedup", median(naive_ms) / median(fast_ms));
  out.add_fraction("fast_vs_dense_speedup", median(dense_ms) / median(fast_ms));

  // Attach the per-phase report of the median-time fast run.
  std::vector<double> sorted = fast_ms;
  std::sort(sorted.begin(), sorted.end());
  const double med = sorted[sorted.size() / 2];
  const std::size_t rep_idx =
      std::find(fast_ms.begin(), fast_ms.end(), med) - fast_ms.begin();
  for (const auto& field : fast_reports[rep_idx].fields) out.fields.push_back(field);

  const std::string text = out.to_text();
  std::cout << text;
  if (!args.report_path.empty()) write_file_atomic(args.report_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sparseconv: output-sensitive sparse convolution\n"
      "Exit codes: 0 success, 1 usage/IO/parse error, 2 verify mismatch,\n"
      "3 bound violation or engine error, 4 selftest failure."};
  app.require_subcommand(1);

  CommonArgs conv_args;
  CLI::App* conv = app.add_subcommand("conv", "Convolve two sparse vector files");
  conv->add_option("--v1", conv_args.v1_path, "first input vector (output length comes from it)")
      ->required();
  conv->add_option("--v2", conv_args.v2_path, "second input vector")->required();
  conv->add_option("--out", conv_args.out_path, "output file (stdout when omitted)");
  conv->add_option("--report", conv_args.report_path, "write a key: value run report here");
  conv->add_option("--mode", conv_args.mode, "fast, naive or verify")
      ->capture_default_str();
  conv->add_option("--threads", conv_args.threads, "engine job parallelism")
      ->capture_default_str();
  conv->add_option("--force-q", conv_args.force_q, "debug: force the field size");
  conv->add_option("--force-c", conv_args.force_c, "debug: force the degree bound");
  conv->add_option("--exp-cap", conv_args.exp_cap,
                   "largest support allowed to build a compaction pool")
      ->capture_default_str();

  CommonArgs reduce_args;
  CLI::App* reduce = app.add_subcommand("reduce", "Print the reduction scheme for a vector");
  reduce->add_option("--v1", reduce_args.v1_path, "input vector")->required();
  reduce->add_option("--force-q", reduce_args.force_q, "debug: force the field size");
  reduce->add_option("--force-c", reduce_args.force_c, "debug: force the degree bound");

  CompactArgs compact_args;
  CLI::App* compact_cmd =
      app.add_subcommand("compact", "Remap huge indices through a compaction prime");
  compact_cmd->add_option("--v1", compact_args.v1_path, "first input vector")->required();
  compact_cmd->add_option("--v2", compact_args.v2_path, "second input vector")->required();
  compact_cmd->add_option("--out-v1", compact_args.out_v1, "compacted first vector")
      ->required();
  compact_cmd->add_option("--out-v2", compact_args.out_v2, "compacted second vector")
      ->required();
  compact_cmd->add_option("--report", compact_args.report_path,
                          "write the compaction report here (stdout when omitted)");
  compact_cmd
      ->add_option("--debug-pool", compact_args.debug_pool,
                   "comma-separated prime pool replacing the generated one")
      ->delimiter(',');
  compact_cmd->add_option("--exp-cap", compact_args.exp_cap,
                          "largest support allowed to build a compaction pool")
      ->capture_default_str();

  SelftestArgs selftest_args;
  CLI::App* selftest = app.add_subcommand("selftest", "Run the seeded invariant suites");
  selftest->add_option("--seed", selftest_args.seed, "base seed")->capture_default_str();
  selftest->add_option("--seeds", selftest_args.seeds, "seeds per suite")
      ->capture_default_str();
  selftest->add_option("--sizes", selftest_args.sizes, "comma-separated support sizes")
      ->delimiter(',');

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Time naive, dense and fast paths");
  bench->add_option("--n1", bench_args.n1, "support size of v1")->capture_default_str();
  bench->add_option("--N1", bench_args.length1, "length of both vectors")
      ->capture_default_str();
  bench->add_option("--n2", bench_args.n2, "support size of v2")->capture_default_str();
  bench->add_option("--density", bench_args.density, "overrides --n1 as N1*density");
  bench->add_option("--reps", bench_args.reps, "repetitions (median reported)")
      ->capture_default_str();
  bench->add_option("--seed", bench_args.seed, "instance seed base")->capture_default_str();
  bench->add_option("--threads", bench_args.threads, "engine job parallelism")
      ->capture_default_str();
  bench->add_option("--vmin", bench_args.vmin, "smallest value")->capture_default_str();
  bench->add_option("--vmax", bench_args.vmax, "largest value")->capture_default_str();
  bench->add_option("--report", bench_args.report_path, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (conv->parsed()) return cmd_conv(conv_args);
    if (reduce->parsed()) return cmd_reduce(reduce_args);
    if (compact_cmd->parsed()) return cmd_compact(compact_args);
    if (selftest->parsed()) return cmd_selftest(selftest_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const VerifyMismatch& e) {
    std::cerr << "error: " << e.what() << " (first differing index " << e.first_index << ")\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ExpCaseNeeded& e) {
    std::cerr << "error: " << e.what() << "; run the compact subcommand first\n";
    return 3;
  } catch (const BoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const EngineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
