#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = nhlaw::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(NHLAW_TEST_TMP) / "cli_scratch";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, DysonPrintsTheClosedForm) {
  const Result r = run({"dyson", "--z", "0.6", "--eta", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("m = 0+0.80000000000000004i"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("# config:"), std::string::npos);
}

TEST(Cli, JsonAndCsvFormats) {
  const Result j = run({"dyson", "--z", "0.6", "--eta", "0.1", "--format", "json"});
  EXPECT_EQ(j.code, 0);
  EXPECT_EQ(j.out.front(), '{');
  EXPECT_NE(j.out.find("\"rho\""), std::string::npos);
  const Result c = run({"density", "--z", "0.3", "--e", "0.5", "--format", "csv"});
  EXPECT_EQ(c.code, 0);
  EXPECT_EQ(c.out.rfind("z,e,", 0), 0u) << c.out;
}

TEST(Cli, UsageErrorsExitWithTwoAndNameTheProblem) {
  Result r = run({"dyson", "--zz", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--zz"), std::string::npos);
  r = run({"dyson", "--z", "abc", "--eta", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("abc"), std::string::npos);
  r = run({});
  EXPECT_EQ(r.code, 2);
  r = run({"experiment", "no-such-experiment"});
  EXPECT_EQ(r.code, 2);
  r = run({"m12", "--z", "0.3", "--eta", "0.1", "--z2", "0.5", "--eta2", "0.2", "--a1", "Q"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, FlowWritesTrajectoryCsv) {
  const fs::path out = scratch("flow.csv");
  const Result r = run({"flow", "--z0", "0.5", "--eta0", "0.2", "--T", "0.05", "--out", out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out);
  EXPECT_EQ(csv.rfind("t,re_z,im_z,eta,re_m,im_m,rho\n", 0), 0u);
  const Result past = run({"flow", "--z0", "0.8", "--eta0", "0.1", "--T", "0.2"});
  EXPECT_EQ(past.code, 0);
  EXPECT_NE(past.out.find("truncated = true"), std::string::npos) << past.out;
}

TEST(Cli, SolverSubcommands) {
  EXPECT_EQ(run({"quantiles", "--z", "0", "--n", "50", "--indices", "1,25"}).code, 0);
  EXPECT_EQ(run({"stability", "--z", "0.3", "--eta", "0.1", "--z2", "0.5", "--eta2", "-0.1"}).code, 0);
  const Result m = run({"m12", "--z", "0.3", "--eta", "0.1", "--z2", "0.5", "--eta2", "-0.1", "--a1", "F",
                        "--a2", "E-", "--format", "json"});
  EXPECT_EQ(m.code, 0) << m.err;
}

TEST(Cli, ExperimentFromConfigFileAndVerifiedReport) {
  const fs::path ini = scratch("small.ini");
  {
    std::ofstream os(ini);
    os << "[experiment]\nname = single-law\nseed = 3\ntrials = 4\nn = 32\n\n[single-law]\nz = 0.4\n";
  }
  const fs::path prefix = scratch("single");
  const Result r = run({"experiment", "single-law", "--config", ini.string(), "--threads", "2", "--out",
                        prefix.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("seed = 3"), std::string::npos);
  EXPECT_NE(r.out.find("z = 0.40000000000000002"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(prefix.string() + ".json"));
  EXPECT_TRUE(fs::exists(prefix.string() + ".csv"));
  EXPECT_TRUE(fs::exists(prefix.string() + "_plots.csv"));

  const Result v = run({"report", prefix.string() + ".json", "--verify", "--threads", "1"});
  EXPECT_EQ(v.code, 0) << v.out << v.err;
  EXPECT_NE(v.out.find("bit-identical"), std::string::npos);
}

TEST(Cli, FailingPredicateExitsWithOne) {
  // A threshold no sample can meet.
  const Result r = run({"experiment", "single-law", "--n", "32", "--trials", "2", "--set", "c=1e-9"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}
