#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "spectori/cli.hpp"

using namespace spectori;

namespace {
struct Outcome {
  int status;
  std::string out, err;
};

Outcome run_cfg(const RunConfig& cfg) {
  std::ostringstream out, err;
  int s = run(cfg, out, err);
  return {s, out.str(), err.str()};
}

RunConfig odd_genus1(std::string sub) {
  RunConfig c;
  c.subcommand = std::move(sub);
  c.family = Family::Odd;
  c.R = 4.25;
  return c;
}

std::string temp_path(const char* name) { return ::testing::TempDir() + name; }
}  // namespace

TEST(Cli, PeriodsRecord) {
  auto r = run_cfg(odd_genus1("periods"));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("periods family=odd n=0 I+=6,10 ", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("eta+="), std::string::npos);
}

TEST(Cli, Deterministic) {
  auto a = run_cfg(odd_genus1("periods")), b = run_cfg(odd_genus1("periods"));
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SearchFindsGenusOneCandidate) {
  auto c = odd_genus1("search");
  c.R = 4.0;
  c.targetPlus = {{3, 5}};
  c.chartPlus = 1;
  auto r = run_cfg(c);
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("intPlus=3,5 intMinus=1"), std::string::npos) << r.out;
}

TEST(Cli, VerifyRoundTripThroughFile) {
  auto c = odd_genus1("search");
  c.targetPlus = {{3, 5}};
  c.chartPlus = 1;
  std::string path = temp_path("spectori_candidate.txt");
  c.output = path;
  ASSERT_EQ(run_cfg(c).status, 0);
  RunConfig v;
  v.subcommand = "verify";
  v.candidateFile = path;
  auto r = run_cfg(v);
  EXPECT_EQ(r.status, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("verification overall=1"), std::string::npos);
  std::remove(path.c_str());
}

TEST(Cli, ExitCodes) {
  auto bad = odd_genus1("periods");
  bad.R = 1.5;
  auto r = run_cfg(bad);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("REJECT_RANGE"), std::string::npos);
  RunConfig v;
  v.subcommand = "verify";
  v.candidateFile = SPECTORI_DATA_DIR "/tampered.txt";
  auto t = run_cfg(v);
  EXPECT_EQ(t.status, 2);
  EXPECT_NE(t.out.find("name=c_integrality pass=0"), std::string::npos);
  v.candidateFile = temp_path("does_not_exist.txt");
  EXPECT_EQ(run_cfg(v).status, 1);
  RunConfig tol = odd_genus1("periods");
  tol.tolerances["quad"] = -1.0;
  EXPECT_EQ(run_cfg(tol).status, 1);
  RunConfig unknown;
  unknown.subcommand = "nope";
  EXPECT_EQ(run_cfg(unknown).status, 1);
}

TEST(Cli, DumpContoursCsv) {
  auto c = odd_genus1("dump-contours");
  c.lambdas = {{0.3, 0.8}};
  c.R = 3.0;
  auto r = run_cfg(c);
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("curve,cycle,k,x,y\n", 0), 0u);
  EXPECT_NE(r.out.find("plus,a1,0,"), std::string::npos) << r.out.substr(0, 200);
}

TEST(Cli, AsymptoticsCsv) {
  RunConfig c;
  c.subcommand = "asymptotics";
  c.R = 3.0;
  c.lambdas = {{0.3, 0.8}};
  c.format = OutputFormat::Csv;
  c.muList = {1e2, 1e3};
  auto r = run_cfg(c);
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("mu,value_re,", 0), 0u);
  EXPECT_NE(r.out.find("# fit quantity="), std::string::npos);
}

TEST(Cli, BinaryEndToEnd) {
  std::string out = temp_path("spectori_cli_out.txt");
  std::string cmd = std::string(SPECTORI_CLI_PATH) + " --family odd --R 4.25 periods > " + out;
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("periods family=odd n=0 I+=6,10 ", 0), 0u) << line;
  std::string bad = std::string(SPECTORI_CLI_PATH) + " periods --family odd --R 1.5 2> /dev/null";
  int st = std::system(bad.c_str());
  EXPECT_NE(st, 0);
  std::remove(out.c_str());
}
