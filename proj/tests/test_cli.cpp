#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ltfnoise/cli.hpp"
#include "ltfnoise/serialize.hpp"

using namespace ltfnoise;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "ltfnoise");
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Json run_json(const std::vector<std::string>& args) {
  const CliRun r = run(args);
  EXPECT_EQ(r.code, 0) << r.err;
  return Json::parse(r.out);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST(Parse, Weights) {
  EXPECT_EQ(parse_weights("1, 2,3.5"), (std::vector<double>{1, 2, 3.5}));
  EXPECT_THROW(parse_weights(""), InvalidArgument);
  EXPECT_THROW(parse_weights("1,x"), InvalidArgument);
  const std::string path = testing::TempDir() + "weights.txt";
  {
    std::ofstream f(path);
    f << "# header\n1\n\n-2  # second\n3\n";
  }
  EXPECT_EQ(parse_weights("@" + path), (std::vector<double>{1, -2, 3}));
  EXPECT_THROW(parse_weights("@/nonexistent/file"), InvalidArgument);
}

TEST(Parse, Epsilon) {
  const auto a = parse_epsilon("1/4");
  ASSERT_TRUE(a.is_rational());
  EXPECT_EQ(*a.rational(), (Fraction{1, 4}));
  EXPECT_FALSE(parse_epsilon("0.1").is_rational());
  EXPECT_EQ(*parse_epsilon("0.1", true).rational(), (Fraction{1, 10}));
  EXPECT_EQ(*parse_epsilon("25e-2", true).rational(), (Fraction{1, 4}));
  EXPECT_THROW(parse_epsilon("abc"), InvalidArgument);
  EXPECT_THROW(parse_epsilon("3/2"), InvalidArgument);
}

TEST(Parse, Grid) {
  EXPECT_EQ(parse_grid("0.1,0.2"), (std::vector<double>{0.1, 0.2}));
  const auto g = parse_grid("0.001:0.1:log10");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[0], 0.001, 1e-18);
  EXPECT_NEAR(g[1], 0.01, 1e-17);
  EXPECT_NEAR(g[2], 0.1, 1e-16);
  const auto lin = parse_grid("0.1:0.5:linear:5");
  ASSERT_EQ(lin.size(), 5u);
  EXPECT_NEAR(lin[2], 0.3, 1e-15);
  EXPECT_EQ(parse_grid("0.01:0.1:log10:4").back(), 0.1);
  EXPECT_THROW(parse_grid(""), InvalidArgument);
  EXPECT_THROW(parse_grid("0.2:0.1:log10"), InvalidArgument);
  EXPECT_THROW(parse_grid("0.1:0.2:cubic"), InvalidArgument);
}

TEST(Serialize, DoublesAndRationalsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 0.136, 1e-300, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
    const Json j = Json::parse(Json{{"v", v}}.dump());
    EXPECT_EQ(j["v"].get<double>(), v);
  }
  mpq_class q("123456789012345678901234567890/7");
  q.canonicalize();
  EXPECT_EQ(rational_from_json(rational_json(q)), q);
}

TEST(Cli, ExactMajority3) {
  const Json j = run_json({"exact", "-w", "1,1,1", "-t", "0", "-e", "0.1", "--stable"});
  EXPECT_NEAR(j["result"]["p"].get<double>(), 0.136, 1e-15);
  EXPECT_EQ(j["method"], "dp");
  EXPECT_EQ(j["result"]["bounds_apply"], true);
  EXPECT_FALSE(j.contains("sidecar"));
  for (const char* key : {"command", "version", "instance", "epsilon", "epsilon_rational",
                          "realized_epsilon", "method", "seed", "result"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Cli, ExactRationalAndEngines) {
  const Json a = run_json({"exact", "-w", "1", "-e", "0.3", "--engine", "enum", "--stable"});
  EXPECT_NEAR(a["result"]["p"].get<double>(), 0.3, 1e-15);
  EXPECT_EQ(a["method"], "enumeration");
  const Json b = run_json({"exact", "-w", "1,1", "-t", "0", "-e", "1/4", "--rational", "--stable"});
  EXPECT_EQ(b["result"]["p_rational"]["num"], "13");
  EXPECT_EQ(b["result"]["p_rational"]["den"], "32");
  EXPECT_EQ(b["result"]["tie_probability_rational"]["num"], "1");
  EXPECT_EQ(b["result"]["tie_probability_rational"]["den"], "2");
  const Json c = run_json({"exact", "-w", "1,1", "-e", "0.25", "--rational", "--stable"});
  EXPECT_EQ(c["epsilon_rational"]["den"], "4");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"exact", "-w", "1,1"}).code, kExitUsage);  // missing -e
  EXPECT_EQ(run({"exact", "-w", "1,0", "-e", "0.1"}).code, kExitUsage);
  EXPECT_EQ(run({"exact", "-e", "0.1"}).code, kExitUsage);
  const CliRun cap = run({"exact", "--simple-majority", "20", "-e", "0.1", "--engine", "enum"});
  EXPECT_EQ(cap.code, kExitCap);
  EXPECT_NE(cap.err.find("max_enum_n"), std::string::npos) << cap.err;
  EXPECT_EQ(run({"exact", "-w", "0.5,1.5", "-e", "0.1", "--engine", "dp"}).code, kExitUsage);
  EXPECT_EQ(run({"mc", "-w", "1,2,3", "-e", "0.1", "--fast"}).code, kExitUsage);
  EXPECT_EQ(run({"sweep", "--simple-majority", "3", "--eps", ""}).code, kExitUsage);
  EXPECT_EQ(run({"verify", "--keypoint-grid", "--inject-fault", "--stable"}).code, kExitVerification);
}

TEST(Cli, McDeterministic) {
  const std::vector<std::string> args{"mc", "-w", "1,1,1", "-t", "0", "-e", "0.5", "-s", "200000",
                                      "--seed", "3", "--stable"};
  const CliRun a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const Json j = Json::parse(a.out);
  EXPECT_LE(j["result"]["ci_low"].get<double>(), 0.5);
  EXPECT_GE(j["result"]["ci_high"].get<double>(), 0.5);
  EXPECT_EQ(j["seed"], 3);
}

TEST(Cli, McFastReportsDyadicEpsilon) {
  const Json j = run_json({"mc", "--simple-majority", "101", "-e", "0.1", "-s", "20000", "--fast", "--stable"});
  EXPECT_EQ(j["method"], "bitparallel");
  EXPECT_LE(j["realized_epsilon"].get<double>(), 0.1);
  EXPECT_GT(j["realized_epsilon"].get<double>(), 0.1 - 1e-9);
}

TEST(Cli, SidecarPresentUnlessStable) {
  const Json j = run_json({"bounds", "-n", "4", "-e", "0.25"});
  ASSERT_TRUE(j.contains("sidecar"));
  EXPECT_TRUE(j["sidecar"].contains("timestamp"));
  EXPECT_TRUE(j["sidecar"].contains("elapsed_seconds"));
}

TEST(Cli, Bounds) {
  const Json j = run_json({"bounds", "-n", "4", "-e", "0.25", "--stable"});
  EXPECT_NEAR(j["result"]["bound_refined"].get<double>(), 0.631348, 1e-6);
  EXPECT_DOUBLE_EQ(j["result"]["bound_sqrt"].get<double>(), 1.0);
  EXPECT_EQ(j["result"]["m"], 4);
  EXPECT_DOUBLE_EQ(j["result"]["mad_binomial"]["value"].get<double>(), 0.75);
  // The bound field satisfies its formula when recomputed from the record.
  const double eps = j["epsilon"].get<double>();
  EXPECT_DOUBLE_EQ(j["result"]["bound_sqrt"].get<double>(), 2 * std::sqrt(eps));

  const Json k = run_json({"bounds", "-n", "10", "-e", "0.01", "--stable"});
  EXPECT_NEAR(k["result"]["bound_sqrt"].get<double>(), 0.2, 1e-15);
  EXPECT_NEAR(k["result"]["sheppard"].get<double>(), 2 * std::asin(0.1) / M_PI, 1e-15);

  const CliRun bad = run({"bounds", "-n", "4", "-e", "0.6", "--stable"});
  EXPECT_EQ(bad.code, kExitUsage);
  const Json b = Json::parse(bad.out);
  EXPECT_TRUE(b["result"]["bound_sqrt"].is_null());
  EXPECT_NEAR(b["result"]["sheppard"].get<double>(), 0.5641, 1e-4);
}

TEST(Cli, VerifyKeypointGrid) {
  const Json j = run_json({"verify", "--keypoint-grid", "--stable"});
  EXPECT_EQ(j["result"]["all_passed"], true);
  EXPECT_EQ(j["result"]["checks"][0]["name"], "keypoint_grid");
  EXPECT_EQ(j["result"]["checks"][0]["cases"], 169);
}

TEST(Cli, VerifyQuickDefaultCorpus) {
  const Json j = run_json({"verify", "--quick", "--stable"});
  EXPECT_EQ(j["result"]["all_passed"], true);
}

TEST(Cli, SearchIncludesMajority) {
  const Json j = run_json({"search", "-n", "3", "-e", "0.1", "--cap", "3", "--stable"});
  EXPECT_NEAR(j["result"]["baseline_simple_majority_p"].get<double>(), 0.136, 1e-15);
  EXPECT_LE(j["result"]["best_p"].get<double>(), 2 * std::sqrt(0.1));
  EXPECT_TRUE(j["result"]["open_question"].get<std::string>().find("open") != std::string::npos);
}

TEST(Cli, SweepCsv) {
  const CliRun r = run({"sweep", "--simple-majority", "1001", "--eps", "0.001:0.1:log10", "-s", "20000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], kSweepHeader);
  EXPECT_EQ(rows[1].rfind("1001,simple,0,0.001,", 0), 0u) << rows[1];
  // Byte-stable across runs.
  EXPECT_EQ(run({"sweep", "--simple-majority", "1001", "--eps", "0.001:0.1:log10", "-s", "20000"}).out, r.out);
}

TEST(Cli, SweepBoundColumnEmptyAboveHalf) {
  const CliRun r = run({"sweep", "-w", "1,2,2", "--eps", "0.7", "-s", "1000"});
  ASSERT_EQ(r.code, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NE(rows[1].find(",,"), std::string::npos);
}

TEST(Cli, RatioCsv) {
  const CliRun r = run({"ratio", "-n", "51", "--eps", "0.01,0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], kRatioHeader);
  EXPECT_EQ(run({"ratio", "-n", "5", "--eps", "0.6"}).code, kExitUsage);
}

TEST(Cli, OutputFile) {
  const std::string path = testing::TempDir() + "record.json";
  std::remove(path.c_str());
  const CliRun r = run({"exact", "-w", "1,1,1", "-e", "1/10", "--stable", "-o", path});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const Json j = Json::parse(in);
  EXPECT_EQ(j["result"]["p_rational"]["num"], "17");
}

TEST(Cli, WorkersFromEnvironment) {
  setenv("LTFNOISE_THREADS", "2", 1);
  const Json j = run_json({"mc", "-w", "1,2,3", "-e", "0.2", "-s", "1000", "--stable"});
  EXPECT_EQ(j["result"]["workers"], 2);
  const Json k = run_json({"mc", "-w", "1,2,3", "-e", "0.2", "-s", "1000", "--workers", "1", "--stable"});
  EXPECT_EQ(k["result"]["workers"], 1);
  unsetenv("LTFNOISE_THREADS");
}
