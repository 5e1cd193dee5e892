#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string text;
  Json report;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Run tsec(const std::string& args, const std::string& out) {
  fs::path dir = fs::temp_directory_path() / ("tsec_cli_test_" + out);
  fs::remove_all(dir);
  std::string cmd = std::string(TSEC_CLI_PATH) + " " + args + " --out " + dir.string() + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  Run r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, {}, {}};
  if (fs::exists(dir / "report.json")) {
    r.text = slurp(dir / "report.json");
    r.report = Json::parse(r.text);
  }
  return r;
}

std::string config(const std::string& name) { return std::string(TSEC_SOURCE_DIR) + "/configs/" + name + ".ini"; }

}  // namespace

TEST(Cli, FindSectionRationalizesGoldenClass) {
  auto r = tsec("find-section --config " + config("golden_class"), "golden_class");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.report["verdict"], "feasible");
  EXPECT_EQ(r.report["c_rational"], Json::array({21, 13, 21}));
  EXPECT_GT(r.report["rational_margin"].get<double>(), 0.0);
  EXPECT_EQ(r.report["exit_code"], 0);
  for (const char* k : {"command", "experiment", "dimension", "resolution", "c", "margin", "K", "N", "section"})
    EXPECT_TRUE(r.report.contains(k)) << k;
}

TEST(Cli, CheckHarmonicRejectsEuclideanShear) {
  auto r = tsec("check-harmonic --config " + config("stream_05"), "stream_05");
  ASSERT_EQ(r.code, 2);
  double dstar = r.report["residuals"]["d_star_theta"]["sup"];
  EXPECT_NEAR(dstar, M_PI, 1e-8);
  EXPECT_LT(r.report["residuals"]["d_theta"]["sup"].get<double>(), 1e-10);
}

TEST(Cli, WindingFieldIsInfeasibleWithCertificate) {
  auto r = tsec("find-section --config " + config("winding"), "winding");
  ASSERT_EQ(r.code, 2);
  EXPECT_EQ(r.report["verdict"], "infeasible");
  EXPECT_TRUE(r.report["c_rational"].is_null());
  const auto& cert = r.report["certificate"];
  EXPECT_TRUE(cert["verified"].get<bool>());
  EXPECT_TRUE(cert["classes_sum_to_zero"].get<bool>());
  ASSERT_EQ(cert["orbits"].size(), 2u);
  auto inv = tsec("check-invariance --config " + config("winding"), "winding_inv");
  EXPECT_EQ(inv.code, 2);
  EXPECT_EQ(inv.report["verdict"], "not_invariant");
}

TEST(Cli, BadInputExitsOne) {
  fs::path bad = fs::temp_directory_path() / "tsec_cli_test_bad.ini";
  std::ofstream(bad) << "[experiment]\nresolution = 15\n[flow]\nfield = \"[1, 0]\"\n";
  EXPECT_EQ(tsec("find-section --config " + bad.string(), "bad").code, 1);
  EXPECT_EQ(tsec("find-section --config /nonexistent.ini", "missing").code, 1);
  EXPECT_EQ(tsec("frobnicate --config " + config("stream_05"), "unknown").code, 1);
  EXPECT_EQ(tsec("check-harmonic", "noconfig").code, 1);
}

TEST(Cli, OverridesReachTheReport) {
  auto r = tsec("check-invariance --config " + config("stream_03") + " --resolution 32", "override");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.report["resolution"], 32);
}

TEST(Cli, ReportsAreByteIdentical) {
  auto a = tsec("round-trip --config " + config("golden_angle"), "det_a");
  auto b = tsec("round-trip --config " + config("golden_angle"), "det_b");
  ASSERT_EQ(a.code, 0);
  ASSERT_FALSE(a.text.empty());
  EXPECT_EQ(a.text, b.text);
}
