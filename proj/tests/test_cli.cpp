// End-to-end tests of the sparseconv binary: flag handling, file formats,
// exit codes and report stability. The binary path comes from the build
// via SPARSECONV_CLI_PATH.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sparseconv/instance_gen.hpp"
#include "sparseconv/sparse_vector.hpp"

namespace sparseconv {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    char tmpl[] = "/tmp/sparseconv_cli_XXXXXX";
    ASSERT_NE(::mkdtemp(tmpl), nullptr);
    dir_ = tmpl;
  }

  static void TearDownTestSuite() {
    if (!dir_.empty()) fs::remove_all(dir_);
  }

  static std::string path(const std::string& name) { return dir_ + "/" + name; }

  static void write_file(const std::string& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    ASSERT_TRUE(out.is_open()) << p;
    out << content;
  }

  static std::string read_file(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    EXPECT_TRUE(in.is_open()) << p;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  static RunResult run(const std::string& args) {
    static int counter = 0;
    const std::string out_file = path("stdout." + std::to_string(counter));
    const std::string err_file = path("stderr." + std::to_string(counter));
    ++counter;
    const std::string cmd =
        "\"" SPARSECONV_CLI_PATH "\" " + args + " >" + out_file + " 2>" + err_file;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_file);
    r.err = read_file(err_file);
    return r;
  }

  static std::string strip_timing_lines(const std::string& report) {
    std::istringstream in(report);
    std::string line, out;
    while (std::getline(in, line))
      if (line.rfind("time_", 0) != 0) out += line + "\n";
    return out;
  }

  static void expect_no_temp_litter() {
    for (const auto& entry : fs::directory_iterator(dir_))
      EXPECT_EQ(entry.path().filename().string().find(".tmp."), std::string::npos)
          << entry.path();
  }

  static std::string dir_;
};

std::string CliTest::dir_;

const char kV1[] = "N 8\n0 2\n3 1\n";
const char kV2[] = "N 2\n0 3\n1 4\n";
const char kW[] = "N 8\n0 6\n2 4\n3 3\n";

TEST_F(CliTest, ConvVerifyWorkedExampleToFile) {
  write_file(path("a.txt"), kV1);
  write_file(path("b.txt"), kV2);
  RunResult r = run("conv --v1 " + path("a.txt") + " --v2 " + path("b.txt") + " --out " +
                    path("w.txt") + " --mode verify");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "");
  EXPECT_EQ(read_file(path("w.txt")), kW);
  expect_no_temp_litter();
}

TEST_F(CliTest, ConvWritesStdoutByDefault) {
  write_file(path("a.txt"), kV1);
  write_file(path("b.txt"), kV2);
  for (const char* mode : {"fast", "naive", "verify"}) {
    RunResult r =
        run("conv --v1 " + path("a.txt") + " --v2 " + path("b.txt") + " --mode " + mode);
    EXPECT_EQ(r.code, 0) << mode << ": " << r.err;
    EXPECT_EQ(r.out, kW) << mode;
  }
}

TEST_F(CliTest, ConvEmptySecondOperand) {
  write_file(path("a.txt"), kV1);
  write_file(path("empty.txt"), "N 3\n");
  RunResult r = run("conv --v1 " + path("a.txt") + " --v2 " + path("empty.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "N 8\n");
}

TEST_F(CliTest, ConvMissingInputExitsOne) {
  write_file(path("b.txt"), kV2);
  RunResult r = run("conv --v1 " + path("nope.txt") + " --v2 " + path("b.txt") + " --out " +
                    path("never.txt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nope.txt"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("never.txt")));
  expect_no_temp_litter();
}

TEST_F(CliTest, ConvParseErrorExitsOne) {
  write_file(path("bad.txt"), "N 8\n0 x\n");
  write_file(path("b.txt"), kV2);
  RunResult r = run("conv --v1 " + path("bad.txt") + " --v2 " + path("b.txt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, ConvUnknownModeExitsOne) {
  write_file(path("a.txt"), kV1);
  write_file(path("b.txt"), kV2);
  RunResult r =
      run("conv --v1 " + path("a.txt") + " --v2 " + path("b.txt") + " --mode turbo");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("turbo"), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("conv --nonsense x").code, 1);
  EXPECT_EQ(run("conv").code, 1);  // missing required --v1/--v2
}

TEST_F(CliTest, ConvForcedParametersInReport) {
  write_file(path("a.txt"), kV1);
  write_file(path("b.txt"), kV2);
  RunResult r = run("conv --v1 " + path("a.txt") + " --v2 " + path("b.txt") +
                    " --mode verify --force-q 13 --force-c 1 --report " + path("rep.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, kW);
  const std::string rep = read_file(path("rep.txt"));
  EXPECT_NE(rep.find("mode: verify\n"), std::string::npos) << rep;
  EXPECT_NE(rep.find("q: 13\n"), std::string::npos) << rep;
  EXPECT_NE(rep.find("c: 1\n"), std::string::npos) << rep;
  EXPECT_NE(rep.find("pairs_total: 3\n"), std::string::npos) << rep;
  EXPECT_NE(rep.find("verified: 1\n"), std::string::npos) << rep;
  EXPECT_NE(rep.find("fallback_fraction: "), std::string::npos) << rep;
  EXPECT_NE(rep.find("time_total_ms: "), std::string::npos) << rep;
}

TEST_F(CliTest, ThreadCountNeverChangesOutputBytes) {
  // A support wide enough to need several assignments and the fallback.
  std::mt19937_64 rng(90210);
  InstanceSpec s1;
  s1.length = u64{1} << 18;
  s1.nnz = 96;
  InstanceSpec s2;
  s2.length = u64{1} << 15;
  s2.nnz = 48;
  write_file(path("t1.txt"), serialize_sparse_vector(random_sparse_vector(rng, s1)));
  write_file(path("t2.txt"), serialize_sparse_vector(random_sparse_vector(rng, s2)));

  auto cmd = [&](const std::string& t) {
    return "conv --v1 " + path("t1.txt") + " --v2 " + path("t2.txt") + " --mode verify --out " +
           path("tw" + t) + " --report " + path("tr" + t) + " --threads " + t;
  };
  RunResult r1 = run(cmd("1"));
  RunResult r4 = run(cmd("4"));
  EXPECT_EQ(r1.code, 0) << r1.err;
  EXPECT_EQ(r4.code, 0) << r4.err;
  EXPECT_EQ(read_file(path("tw1")), read_file(path("tw4")));
  EXPECT_EQ(strip_timing_lines(read_file(path("tr1"))),
            strip_timing_lines(read_file(path("tr4"))));
}

TEST_F(CliTest, ReduceWorkedDump) {
  write_file(path("r.txt"), "N 96\n95 7\n");
  RunResult r = run("reduce --v1 " + path("r.txt") + " --force-q 13 --force-c 2");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "q: 13\n"
            "c: 2\n"
            "assignments: 2\n"
            "poly 95 0 covered_by 2\n"
            "poly 95 1 covered_by 2\n"
            "poly 95 2 covered_by 2\n"
            "poly 95 3 covered_by 2\n"
            "polynomials: 4\n"
            "assignments_selected: 1\n"
            "covered_by 2: 4 polynomials\n");
}

TEST_F(CliTest, ReduceAutomaticParameters) {
  write_file(path("a.txt"), kV1);
  RunResult r = run("reduce --v1 " + path("a.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("q: 17\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("polynomials: 4\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("assignments_selected: "), std::string::npos) << r.out;
}

TEST_F(CliTest, ReduceHugeIndicesPointAtCompact) {
  write_file(path("huge.txt"), "N 4611686018427387910\n4611686018427387904 1\n");
  RunResult r = run("reduce --v1 " + path("huge.txt"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("compact subcommand"), std::string::npos) << r.err;
}

TEST_F(CliTest, CompactMicroPool) {
  write_file(path("c1.txt"), "N 13\n0 1\n5 2\n12 3\n");
  write_file(path("c2.txt"), "N 1\n");
  RunResult r = run("compact --v1 " + path("c1.txt") + " --v2 " + path("c2.txt") +
                    " --out-v1 " + path("c1out.txt") + " --out-v2 " + path("c2out.txt") +
                    " --debug-pool 2,3,11");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "compaction_prime: 11\n"
            "compaction_rounds: 2\n"
            "compaction_pool_primes: 3\n"
            "compaction_pool_bits: 7\n"
            "compaction_diff_bits: 9\n"
            "union_indices: 3\n");
  EXPECT_EQ(read_file(path("c1out.txt")), "N 11\n0 1\n1 3\n5 2\n");
  EXPECT_EQ(read_file(path("c2out.txt")), "N 11\n");
  expect_no_temp_litter();
}

TEST_F(CliTest, CompactRejectsCompositePoolEntry) {
  write_file(path("c1.txt"), "N 13\n0 1\n5 2\n");
  write_file(path("c2.txt"), "N 1\n");
  RunResult r = run("compact --v1 " + path("c1.txt") + " --v2 " + path("c2.txt") +
                    " --out-v1 " + path("x1.txt") + " --out-v2 " + path("x2.txt") +
                    " --debug-pool 4,6");
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(fs::exists(path("x1.txt")));
}

TEST_F(CliTest, CompactGeneratedPoolRoundTrips) {
  write_file(path("g1.txt"), "N 4611686018427387910\n4611686018427387904 3\n"
                             "4611686018427387909 2\n");
  write_file(path("g2.txt"), "N 1\n0 1\n");
  RunResult r = run("compact --v1 " + path("g1.txt") + " --v2 " + path("g2.txt") +
                    " --out-v1 " + path("g1out.txt") + " --out-v2 " + path("g2out.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("compaction_pool_primes: 9\n"), std::string::npos) << r.out;
  SparseVector v1c = parse_sparse_vector(read_file(path("g1out.txt")));
  EXPECT_EQ(v1c.nnz(), 2u);
  EXPECT_EQ(parse_sparse_vector(read_file(path("g2out.txt"))).nnz(), 1u);
}

TEST_F(CliTest, ConvCompactsHugeIndicesInternally) {
  write_file(path("h1.txt"), "N 4611686018427387910\n4611686018427387904 3\n"
                             "4611686018427387909 2\n");
  write_file(path("h2.txt"), "N 1\n0 1\n");
  RunResult r = run("conv --v1 " + path("h1.txt") + " --v2 " + path("h2.txt") +
                    " --mode verify --report " + path("hrep.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string rep = read_file(path("hrep.txt"));
  EXPECT_NE(rep.find("compacted: 1\n"), std::string::npos) << rep;
  EXPECT_NE(rep.find("compaction_prime: "), std::string::npos) << rep;
  EXPECT_NE(rep.find("verified: 1\n"), std::string::npos) << rep;
  // Output lives in compacted space: its length is the compaction prime.
  SparseVector w = parse_sparse_vector(r.out);
  EXPECT_EQ(w.nnz(), 2u);
  EXPECT_LT(w.length, 100u);
}

TEST_F(CliTest, ConvPoolCapExitsThree) {
  write_file(path("h1.txt"), "N 4611686018427387910\n4611686018427387904 3\n"
                             "4611686018427387909 2\n");
  write_file(path("h2.txt"), "N 1\n0 1\n");
  RunResult r = run("conv --v1 " + path("h1.txt") + " --v2 " + path("h2.txt") +
                    " --exp-cap 1");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("exp"), std::string::npos) << r.err;
}

TEST_F(CliTest, SelftestSmoke) {
  RunResult r = run("selftest --seeds 1 --sizes 8");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  for (const char* suite :
       {"poly_lemmas", "table_bounds", "oracle_equiv", "compaction_soundness"}) {
    EXPECT_NE(r.out.find(std::string("[selftest] ") + suite + ": pass"), std::string::npos)
        << r.out;
  }
}

TEST_F(CliTest, BenchSmoke) {
  RunResult r = run("bench --n1 8 --N1 512 --n2 4 --reps 1 --seed 3 --report " +
                    path("bench.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("bench_n1: 8\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("agreement: ok\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("single_sample: 1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("fast_vs_dense_speedup: "), std::string::npos) << r.out;
  EXPECT_EQ(r.out, read_file(path("bench.txt")));
}

TEST_F(CliTest, BenchDensityOverridesSupport) {
  RunResult r = run("bench --N1 1024 --density 0.01 --n2 4 --reps 1 --seed 5");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("bench_n1: 10\n"), std::string::npos) << r.out;
}

}  // namespace
}  // namespace sparseconv
