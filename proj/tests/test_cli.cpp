#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msmux/cli.h"

namespace msmux::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kData = MSMUX_TEST_DATA_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "msmux");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("msmux_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, HelpDocumentsExitCodes) {
  const Result r = invoke({"--help"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
  EXPECT_EQ(invoke({"frobnicate"}).code, kConfigError);
  EXPECT_EQ(invoke({}).code, kConfigError);
}

TEST_F(CliTest, AnalyticPresetTable2) {
  const Result r = invoke({"analytic", "--preset", "table2"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["tool"], "msmux");
  EXPECT_EQ(j["result"]["row_count"], 6);
  const std::vector<double> printed{15.55, 28.18, 45.46, 53.40, 67.56, 72.91};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(j["result"]["rows"][i]["computed"]["rho_from_printed_A"].get<double>(), printed[i], 0.01);
  }
}

TEST_F(CliTest, AnalyticCsvFormat) {
  const Result r = invoke({"analytic", "--preset", "table3", "--format", "csv"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
            "d1,p,D1,D4,A1,A4,rho,A1_calc,A4_calc,rho_calc,rho_from_printed_A,"
            "iid_D4,iid_residual,max_rel_dev,within_rel_tol,rounding_consistent,error");
  EXPECT_NE(r.out.find("16.87"), std::string::npos);
}

TEST_F(CliTest, AnalyticEmptyInput) {
  const Result r = invoke({"analytic", "--input", kData + "/table_empty.csv"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(json::parse(r.out)["result"]["row_count"], 0);
}

TEST_F(CliTest, AnalyticSaturatedRowRendersInf) {
  const Result r = invoke({"analytic", "--input", kData + "/table_saturated.csv", "--format", "csv"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find(",inf,"), std::string::npos);
}

TEST_F(CliTest, AnalyticMalformedCsv) {
  const Result r = invoke({"analytic", "--input", kData + "/table_bad.csv"});
  EXPECT_EQ(r.code, kInputFormatError);
  EXPECT_NE(r.err.find(":3"), std::string::npos);
}

TEST_F(CliTest, ConfigErrors) {
  const std::string cfg = write("c.json", R"({"d1": 3, "shots": 10})");
  EXPECT_EQ(invoke({"simulate", "--config", cfg}).code, kConfigError);
  const std::string bad = write("bad.json", "{not json");
  EXPECT_EQ(invoke({"simulate", "--config", bad}).code, kConfigError);
  EXPECT_EQ(invoke({"simulate", "--config", path("missing.json")}).code, kIoError);
  EXPECT_EQ(invoke({"analytic"}).code, kConfigError);
  EXPECT_EQ(invoke({"analytic", "--preset", "nope"}).code, kConfigError);
}

TEST_F(CliTest, SimulateDeterministicAcrossThreads) {
  const std::string cfg = write("sim.json", R"({"k": 4, "n_shots": 150000, "seed": 7,
      "failure_model": {"kind": "common_mode", "per_site_fail": [0.6, 0.7, 0.5, 0.8], "c": 0.3},
      "escape_model": {"kind": "bernoulli_error", "q": 0.1}, "escape_threshold": 2,
      "records": true})");
  std::string summary;
  std::string records;
  for (const char* threads : {"1", "4", "16"}) {
    const std::string out = path(std::string("out") + threads);
    const Result r = invoke({"simulate", "--config", cfg, "--out", out, "--threads", threads});
    ASSERT_EQ(r.code, kOk) << r.err;
    const std::string s = slurp(fs::path(out) / "summary.json");
    const std::string rec = slurp(fs::path(out) / "records.jsonl");
    if (summary.empty()) {
      summary = s;
      records = rec;
    } else {
      EXPECT_EQ(s, summary);
      EXPECT_EQ(rec, records);
    }
  }
  EXPECT_FALSE(records.empty());
}

TEST_F(CliTest, SimulateEmbeddedConfigReproducesReport) {
  const std::string cfg = write("sim.json", R"({"n_shots": 20000, "seed": 3, "calibrate_D1": 0.4903})");
  const Result first = invoke({"simulate", "--config", cfg});
  ASSERT_EQ(first.code, kOk) << first.err;
  const json report = json::parse(first.out);
  const std::string embedded = write("embedded.json", report["provenance"]["config"].dump());
  const Result second = invoke({"simulate", "--config", embedded});
  ASSERT_EQ(second.code, kOk) << second.err;
  EXPECT_EQ(first.out, second.out);
}

TEST_F(CliTest, SimulateSeedOverride) {
  const std::string cfg = write("sim.json", R"({"n_shots": 5000, "seed": 3, "calibrate_D1": 0.5})");
  const json a = json::parse(invoke({"simulate", "--config", cfg, "--seed", "11"}).out);
  EXPECT_EQ(a["provenance"]["seed"], 11);
  EXPECT_NE(a["provenance"]["config_hash"],
            json::parse(invoke({"simulate", "--config", cfg}).out)["provenance"]["config_hash"]);
}

TEST_F(CliTest, SimulateUnwritableOutput) {
  const std::string file = write("blocker", "x");
  const std::string cfg = write("sim.json", R"({"n_shots": 10})");
  const Result r = invoke({"simulate", "--config", cfg, "--out", file + "/sub"});
  EXPECT_EQ(r.code, kIoError);
}

TEST_F(CliTest, SimulateNoKeptShots) {
  const std::string cfg = write("sim.json", R"({"n_shots": 100, "calibrate_D1": 1.0})");
  const Result r = invoke({"simulate", "--config", cfg});
  EXPECT_EQ(r.code, kEmptyResult);
  EXPECT_EQ(json::parse(r.out)["result"]["empirical_A"], "inf");
}

TEST_F(CliTest, SimulateOutDirFromEnvironment) {
  const std::string cfg = write("sim.json", R"({"n_shots": 100, "calibrate_D1": 0.2})");
  const std::string out = path("envout");
  ::setenv(kOutDirEnv, out.c_str(), 1);
  const Result r = invoke({"simulate", "--config", cfg});
  ::unsetenv(kOutDirEnv);
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(fs::exists(fs::path(out) / "summary.json"));
}

TEST_F(CliTest, GapSweepThreeRecordFixture) {
  const std::string out = path("sweep");
  const Result r = invoke({"gap-sweep", "--records", kData + "/three_records.jsonl",
                           "--thresholds", "0,7", "--out", out});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(slurp(fs::path(out) / "curve_1.csv"),
            "G,kept_correct,kept_error,attempts,logical_error,extrapolated\n"
            "0,2,1,2,0.333333,0\n"
            "7,2,0,3,0,0\n");
}

TEST_F(CliTest, GapSweepSinglePointGrid) {
  const Result r = invoke({"gap-sweep", "--records", kData + "/three_records.csv",
                           "--thresholds", "0", "--attempts", "6", "--format", "csv"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(r.out,
            "G,kept_correct,kept_error,attempts,logical_error,extrapolated\n"
            "0,2,1,2,0.333333,0\n");
}

TEST_F(CliTest, GapSweepCrossing) {
  const Result r = invoke({"gap-sweep", "--records", kData + "/crossing_a.jsonl", "--records",
                           kData + "/crossing_b.jsonl", "--thresholds", "0,100"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["result"]["crossing"]["G_star"].get<double>(), 50.0);
}

TEST_F(CliTest, GapSweepSchemaViolation) {
  const Result r = invoke({"gap-sweep", "--records", kData + "/bad_records.jsonl"});
  EXPECT_EQ(r.code, kInputFormatError);
  EXPECT_NE(r.err.find(":3"), std::string::npos);
}

TEST_F(CliTest, GapSweepNothingKept) {
  const Result r = invoke({"gap-sweep", "--records", kData + "/three_records.jsonl",
                           "--thresholds", "50"});
  EXPECT_EQ(r.code, kEmptyResult);
}

TEST_F(CliTest, GapSweepMissingFile) {
  EXPECT_EQ(invoke({"gap-sweep", "--records", path("none.jsonl")}).code, kIoError);
}

TEST_F(CliTest, LayoutBuiltin) {
  const std::string out = path("layout");
  const Result r = invoke({"layout", "--out", out});
  ASSERT_EQ(r.code, kOk) << r.err;
  const json j = json::parse(slurp(fs::path(out) / "layout.json"));
  EXPECT_EQ(j["result"]["idle_count"], 241);
  EXPECT_TRUE(j["result"]["containment_ok"]);
  EXPECT_TRUE(j["result"]["nonoverlap_ok"]);
  EXPECT_TRUE(fs::exists(fs::path(out) / "layout_map.txt"));
}

TEST_F(CliTest, LayoutOverlapFixture) {
  const Result r = invoke({"layout", "--layout", kData + "/overlap_layout.txt"});
  EXPECT_EQ(r.code, kValidationFailed);
  const json j = json::parse(r.out);
  EXPECT_FALSE(j["result"]["nonoverlap_ok"]);
  EXPECT_EQ(j["result"]["violations"][0]["cells"], json::parse("[[2, 1]]"));
}

TEST_F(CliTest, LayoutPack) {
  const Result r = invoke({"layout", "--pack", "4"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["result"]["placed"], 4);
  EXPECT_EQ(j["result"]["idle_count"], 241);
}

TEST_F(CliTest, LayoutParseError) {
  const Result r = invoke({"layout", "--layout", kData + "/bad_layout.txt"});
  EXPECT_EQ(r.code, kInputFormatError);
  EXPECT_NE(r.err.find(":6"), std::string::npos);
}

}  // namespace
}  // namespace msmux::cli
