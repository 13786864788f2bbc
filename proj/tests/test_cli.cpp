#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "robshash/datasets.hpp"
#include "robshash/distributions.hpp"
#include "robshash/format.hpp"
#include "robshash/moments.hpp"

namespace fs = std::filesystem;
using robshash::read_file;
using Json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = robshash::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("robshash_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name)) << content;
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, VersionAndUsage) {
  EXPECT_EQ(run({"--version"}).code, 0);
  EXPECT_EQ(run({}).code, robshash::cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, robshash::cli::kUsage);
  EXPECT_EQ(run({"detect", "--builtin", "hbk", "--column", "x1", "--method", "magic"}).code,
            robshash::cli::kUsage);
}

TEST_F(CliTest, MissingColumnIsUsageErrorWithoutOutput) {
  const std::string out = path("out");
  const Result r = run({"detect", "--builtin", "hbk", "--column", "nope", "--out", out});
  EXPECT_EQ(r.code, robshash::cli::kUsage);
  EXPECT_NE(r.err.find("nope"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, DataErrorsHaveTheirOwnCode) {
  const std::string csv = write("bad.csv", "v\nx\ny\n");
  EXPECT_EQ(run({"detect", "--input", csv, "--column", "v"}).code, robshash::cli::kData);
  EXPECT_EQ(run({"detect", "--input", path("absent.csv"), "--column", "v"}).code,
            robshash::cli::kData);
  const std::string flat = write("flat.csv", "v\n1\n1\n1\n1\n1\n1\n1\n1\n1\n2\n");
  EXPECT_EQ(run({"detect", "--input", flat, "--column", "v"}).code, robshash::cli::kData);
}

TEST_F(CliTest, DetectWritesTablesSummaryAndManifest) {
  const std::string out = path("hbk");
  const Result r = run({"detect", "--builtin", "hbk", "--column", "x1", "--method", "shash-z",
                        "--plots", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"rows.csv", "summary.json", "manifest.json", "hist_before.csv",
                        "hist_after.csv", "qq_before.csv", "qq_after.csv"})
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
  const Json s = Json::parse(read_file(out + "/summary.json"));
  EXPECT_EQ(s.at("flag_count"), 14);
  EXPECT_EQ(s.at("known_outliers").at("false_positives"), 0);
  const Json m = Json::parse(read_file(out + "/manifest.json"));
  EXPECT_EQ(m.at("subcommand"), "detect");
  EXPECT_TRUE(m.contains("seed"));
  EXPECT_EQ(m.at("version"), robshash::cli::kVersion);
  const std::string rows = read_file(out + "/rows.csv");
  EXPECT_EQ(rows.substr(0, rows.find('\n')), "row,value,transformed,flagged");
}

TEST_F(CliTest, TopGearMpgClusterIsFlagged) {
  const Result r = run({"detect", "--builtin", "topgear", "--column", "mpg", "--method", "shash-i",
                        "--final-threshold", "4", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json s = Json::parse(r.out);
  const auto ds = robshash::load_builtin("topgear");
  const auto& mpg = ds.column("mpg");
  std::vector<double> flagged;
  for (const auto& row : s.at("flagged_rows")) flagged.push_back(mpg[row.get<std::size_t>() - 1]);
  for (std::size_t i = 0; i < mpg.size(); ++i)
    if (mpg[i] >= 235 && mpg[i] <= 470)
      EXPECT_NE(std::find(flagged.begin(), flagged.end(), mpg[i]), flagged.end()) << mpg[i];
}

TEST_F(CliTest, IdentityTransformReproducesInput) {
  const std::string csv = write("x.csv", "x\n-3.25\n0\n1e-7\n12345.678\n");
  const Result r = run({"transform", "--input", csv, "--column", "x", "--params", "0,1,0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "row,value,transformed");
  int n = 0;
  while (std::getline(lines, line)) {
    const auto a = line.find(',');
    const auto b = line.rfind(',');
    const double v = std::stod(line.substr(a + 1, b - a - 1));
    const double z = std::stod(line.substr(b + 1));
    EXPECT_NEAR(z, v, 1e-12 * std::max(1.0, std::abs(v)));
    ++n;
  }
  EXPECT_EQ(n, 4);
  EXPECT_EQ(run({"transform", "--input", csv, "--column", "x"}).code, robshash::cli::kUsage);
  EXPECT_EQ(run({"transform", "--input", csv, "--column", "x", "--params", "0,-1,0,1"}).code,
            robshash::cli::kUsage);
}

TEST_F(CliTest, FitNeedsEightRows) {
  const std::string csv = write("five.csv", "x\n1\n2\n3\n4\n5\n");
  const Result r = run({"fit", "--input", csv, "--column", "x"});
  EXPECT_EQ(r.code, robshash::cli::kUsage);
  EXPECT_NE(r.err.find("8"), std::string::npos);
}

TEST_F(CliTest, FitThenTransformNormalizes) {
  std::string text = "x\n";
  const robshash::Sample sample = robshash::shash_sample({2, 1, 0.8, 0.7}, 3000, 5);
  for (double v : sample.values())
    text += robshash::format_double(v) + "\n";
  const std::string csv = write("s.csv", text);
  const Result r = run({"transform", "--input", csv, "--column", "x", "--fit"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  std::vector<double> z;
  while (std::getline(lines, line)) z.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  const auto m = robshash::sample_moments(z);
  EXPECT_NEAR(m.mean, 0.0, 0.1);
  EXPECT_NEAR(m.variance, 1.0, 0.1);
  EXPECT_LT(std::abs(m.skewness), 0.15);
  EXPECT_LT(std::abs(m.excess_kurtosis), 0.3);
}

TEST_F(CliTest, EstimatorsReportsAllSix) {
  const Result r = run({"estimators", "--builtin", "wood", "--column", "x1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json s = Json::parse(r.out);
  for (const char* k : {"median", "mad", "huber_location", "huber_scale", "qn", "sn"})
    EXPECT_TRUE(s.contains(k)) << k;
}

TEST_F(CliTest, DetectReplayIsByteIdentical) {
  const std::string a = path("a"), b = path("b");
  ASSERT_EQ(run({"detect", "--builtin", "topgear", "--column", "price", "--method", "shash-i",
                 "--plots", "--out", a}).code,
            0);
  const Result r = run({"replay", "--manifest", a + "/manifest.json", "--out", b});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& e : fs::directory_iterator(a))
    EXPECT_EQ(read_file(e.path().string()), read_file((fs::path(b) / e.path().filename()).string()))
        << e.path().filename();
}

TEST_F(CliTest, ReplayDetectsChangedInput) {
  const std::string csv = write("in.csv", "x\n1\n2\n3\n4\n5\n6\n7\n8\n9\n30\n");
  const std::string a = path("a");
  ASSERT_EQ(run({"estimators", "--input", csv, "--column", "x", "--out", a}).code, 0);
  write("in.csv", "x\n1\n2\n3\n4\n5\n6\n7\n8\n9\n31\n");
  EXPECT_EQ(run({"replay", "--manifest", a + "/manifest.json"}).code, robshash::cli::kData);
}

TEST_F(CliTest, SimulateAndReplay) {
  const std::string cfg = write("study.cfg",
                                "distributions = laplace(0,3), gamma(2,1)\n"
                                "methods = robust-z, shash-z\n"
                                "fractions = 0, 0.1\n"
                                "replications = 3\n"
                                "n = 120\n"
                                "calibration_n = 3000\n"
                                "bias_replications = 5\n");
  const std::string a = path("a"), b = path("b");
  const Result r = run({"simulate", "--config", cfg, "--out", a, "--threads", "2", "--bias-study"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"study.csv", "runs.csv", "bias_summary.csv", "bias_estimates.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(fs::path(a) / f)) << f;
  ASSERT_EQ(run({"replay", "--manifest", a + "/manifest.json", "--out", b}).code, 0);
  for (const auto& e : fs::directory_iterator(a))
    EXPECT_EQ(read_file(e.path().string()), read_file((fs::path(b) / e.path().filename()).string()))
        << e.path().filename();
}

TEST_F(CliTest, SimulateConfigErrorNamesField) {
  const std::string cfg = write("bad.cfg", "distributions = normal(10,3), cauchy(0,1)\n");
  const Result r = run({"simulate", "--config", cfg, "--out", path("o")});
  EXPECT_EQ(r.code, robshash::cli::kUsage);
  EXPECT_NE(r.err.find("distributions"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("o")));
}
