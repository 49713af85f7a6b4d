#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "levy_ou/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = levy_ou::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct Csv {
  json meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("# ", 0) == 0) {
      csv.meta = json::parse(line.substr(2));
    } else if (csv.header.empty()) {
      csv.header = split(line);
    } else {
      csv.rows.push_back(split(line));
    }
  }
  return csv;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("levy_ou_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

  fs::path dir_;
};

constexpr const char* kGauss1 =
    R"({"dim": 1, "drift": [0], "diffusion": [[1]], "jump_rate": 0, "jumps": []})";
constexpr const char* kZero =
    R"({"dim": 1, "drift": [0], "diffusion": [[0]], "jump_rate": 0, "jumps": []})";
constexpr const char* kJumps =
    R"({"dim": 1, "drift": [0], "diffusion": [[0.5]], "jump_rate": 1,
        "jumps": [{"weight": 0.5, "vector": [1]}, {"weight": 0.5, "vector": [-2]}]})";

}  // namespace

TEST_F(CliTest, NoiseIsByteIdenticalAcrossRuns) {
  const std::string triplet = write("gauss1.json", kGauss1);
  const std::vector<std::string> args{"noise", "--triplet", triplet, "--t-end", "1", "--n", "100", "--seed", "7"};
  const Result a = run(args);
  const Result b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const Csv csv = parse_csv(a.out);
  EXPECT_EQ(csv.rows.size(), 100u);
  EXPECT_EQ(csv.meta["seed"], 7);
  EXPECT_TRUE(csv.meta.contains("triplet_hash"));
  EXPECT_NE(run({"noise", "--triplet", triplet, "--seed", "8"}).out, a.out);
}

TEST_F(CliTest, NoiseCheckCfGapDecreases) {
  const Result r = run({"noise", "--check-cf", "--f", "exp-decay", "--t-end", "10", "--n", "10,100,1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv csv = parse_csv(r.out);
  ASSERT_EQ(csv.rows.size(), 3u);
  EXPECT_GT(std::stod(csv.rows[0][1]), std::stod(csv.rows[1][1]));
  EXPECT_GT(std::stod(csv.rows[1][1]), std::stod(csv.rows[2][1]));
  EXPECT_GE(csv.meta["config"]["fitted_rate"].get<double>(), 0.8);
}

TEST_F(CliTest, NoiseWithoutTripletIsUsageError) {
  const Result r = run({"noise", "--n", "10"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, SimulateExactSummary) {
  const Result r =
      run({"simulate", "--m", "1", "--x0", "2", "--exact", "--ensemble", "100000", "--t", "1", "--seed", "1",
           "--summary", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const json& c = j["components"][0];
  EXPECT_NEAR(c["mean"].get<double>(), 2.0 * std::exp(-1.0), 3.0 * c["mean_stderr"].get<double>());
  EXPECT_NEAR(c["variance"].get<double>(), (1.0 - std::exp(-2.0)) / 2.0, 3.0 * c["variance_stderr"].get<double>());
}

TEST_F(CliTest, SimulateZeroTripletDecays) {
  const Result r = run({"simulate", "--m", "1", "--x0", "1", "--triplet", write("zero.json", kZero)});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv csv = parse_csv(r.out);
  ASSERT_EQ(csv.header, (std::vector<std::string>{"t", "x_1"}));
  for (const auto& row : csv.rows) EXPECT_NEAR(std::stod(row[1]), std::exp(-std::stod(row[0])), 1e-14);
}

TEST_F(CliTest, SimulateUsageErrors) {
  EXPECT_EQ(run({"simulate", "--exact", "--triplet", write("jumps.json", kJumps)}).code, 2);
  EXPECT_EQ(run({"simulate", "--ensemble", "10"}).code, 2);
  EXPECT_EQ(run({"simulate", "--m", "-1"}).code, 2);
  EXPECT_EQ(run({"simulate", "--triplet", write("bad.json", "{not json")}).code, 2);
  EXPECT_EQ(run({"simulate", "--triplet", (dir_ / "missing.json").string()}).code, 2);
  EXPECT_EQ(run({"simulate", "--sigma2", "-1"}).code, 2);
}

TEST_F(CliTest, ThreadsDoNotChangeOutput) {
  const std::vector<std::string> base{"simulate", "--triplet", write("jumps.json", kJumps), "--ensemble", "3000",
                                      "--summary", "--seed", "5"};
  auto one = base;
  one.insert(one.end(), {"--threads", "1"});
  auto four = base;
  four.insert(four.end(), {"--threads", "4"});
  const Result a = run(one);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, run(four).out);
}

TEST_F(CliTest, DensityBrownianComparison) {
  const Result r = run({"density", "--mehler", "--m", "1e-8", "--D", "0.5", "--t", "1", "--compare-brownian"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv csv = parse_csv(r.out);
  EXPECT_EQ(csv.rows.size(), 401u);
  EXPECT_LT(csv.meta["config"]["max_rel_gap"].get<double>(), 1e-4);
  EXPECT_NE(r.err.find("max relative gap"), std::string::npos);
}

TEST_F(CliTest, CharfnAtZero) {
  const Result r = run({"charfn", "--p", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv csv = parse_csv(r.out);
  ASSERT_EQ(csv.rows.size(), 1u);
  EXPECT_EQ(csv.rows[0], (std::vector<std::string>{"0", "1", "0"}));
}

TEST_F(CliTest, CharfnEmpiricalColumns) {
  const Result r = run({"charfn", "--triplet", write("jumps.json", kJumps), "--p", "1,2", "--empirical",
                        "--ensemble", "2000", "--dt", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv csv = parse_csv(r.out);
  EXPECT_EQ(csv.header, (std::vector<std::string>{"p", "re", "im", "emp_re", "emp_im", "abs_err"}));
  for (const auto& row : csv.rows) EXPECT_LT(std::stod(row[5]), 5.0 / std::sqrt(2000.0));
}

TEST_F(CliTest, GeneratorHeatRatio) {
  const Result r = run({"generator", "--heat", "--h", "0.1,0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv csv = parse_csv(r.out);
  ASSERT_EQ(csv.rows.size(), 2u);
  const double ratio = std::stod(csv.rows[1][3]);
  EXPECT_GE(ratio, 3.2);
  EXPECT_LE(ratio, 4.8);
}

TEST_F(CliTest, GeneratorOnSquare) {
  const Result r = run({"generator", "--sigma2", "2", "--fn", "square", "--h", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& row : parse_csv(r.out).rows) EXPECT_NEAR(std::stod(row[2]), 2.0, 1e-9);
}

TEST_F(CliTest, TreesEnumerateLineCounts) {
  const Result zero = run({"trees", "enumerate", "--p", "2", "--i", "0"});
  ASSERT_EQ(zero.code, 0) << zero.err;
  EXPECT_EQ(parse_csv(zero.out).rows.size(), 2u);
  const Csv two = parse_csv(run({"trees", "enumerate", "--p", "2", "--i", "2"}).out);
  EXPECT_EQ(two.header, (std::vector<std::string>{"order", "tree", "value"}));
  EXPECT_EQ(two.rows.size(), 16u);
}

TEST_F(CliTest, TreesEvaluateLinearIdentity) {
  const Result r = run({"trees", "evaluate", "--lambda", "0", "--N", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_LE(j["linear_error"].get<double>(), 1e-12);
  EXPECT_EQ(j["order_sums"].size(), 4u);
}

TEST_F(CliTest, TreesEvaluateReport) {
  const Result r = run({"trees", "evaluate", "--p", "2", "--N", "2", "--lambda", "0.1", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  for (const char* key : {"order_sums", "total", "oracle", "error", "partial_errors"}) EXPECT_TRUE(j.contains(key));
}

TEST_F(CliTest, TreesOrderCheck) {
  const Result r = run({"trees", "order-check", "--lambdas", "0.05,0.1,0.2", "--seed", "88"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double slope = json::parse(r.out)["slope"].get<double>();
  EXPECT_GE(slope, 2.6);
  EXPECT_LE(slope, 3.4);
}

TEST_F(CliTest, OutWritesDataAndMetadataFiles) {
  const fs::path out = dir_ / "density.csv";
  const Result r = run({"--out", out.string(), "density", "--nodes", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream data(out);
  std::stringstream ss;
  ss << data.rdbuf();
  EXPECT_EQ(parse_csv(ss.str()).rows.size(), 11u);
  std::ifstream meta(out.string() + ".meta.json");
  ASSERT_TRUE(meta.good());
  EXPECT_EQ(json::parse(meta)["command"], "density");
}

TEST_F(CliTest, GlobalFlagsAfterSubcommand) {
  const Result a = run({"--seed", "9", "trees", "enumerate", "--i", "1"});
  const Result b = run({"trees", "enumerate", "--i", "1", "--seed", "9"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, UsageErrorsAndHelp) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--format", "xml", "density"}).code, 2);
  EXPECT_EQ(run({"density", "--nodes", "abc"}).code, 2);
  EXPECT_EQ(run({"trees"}).code, 2);
  EXPECT_EQ(run({"trees", "order-check", "--lambdas", "0.1"}).code, 2);
  const Result help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("simulate"), std::string::npos);
  EXPECT_EQ(run({"generator", "--help"}).code, 0);
}

TEST_F(CliTest, NumericalFailureExitCode) {
  const Result r = run({"trees", "evaluate", "--p", "3", "--x0", "50", "--lambda", "-100", "--dt", "0.01"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("numerical"), std::string::npos);
}
