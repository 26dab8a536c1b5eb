#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "cpm/cli.hpp"
#include "support/oracles.hpp"

namespace cpm::cli {
namespace {

namespace fs = std::filesystem;

const std::string kGolden = std::string(CPM_TEST_DATA) + "/golden/";
const std::string kData = std::string(CPM_TEST_DATA) + "/data/";

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome cpmc(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cpmc_main(args, out, err);
  return {status, out.str(), err.str()};
}

Outcome scenario(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = scenario_main(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("cpm_cli_test_" + std::to_string(::getpid()) + "_" + name);
}

TEST(Cpmc, TransformsToStdout) {
  const auto r = cpmc({"--ext", "cyclic", kGolden + "table2.cpm"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, oracle::read_file(kGolden + "table2.expected.c"));
}

TEST(Cpmc, OrderOfExtFlagsIsApplicationOrder) {
  const auto a = cpmc({"--ext", "redundancy", "--ext", "cyclic", kGolden + "table2.cpm"});
  const auto b = cpmc({"--ext", "cyclic", "--ext", "redundancy", kGolden + "table2.cpm"});
  EXPECT_NE(a.out.substr(0, a.out.find('\n')), b.out.substr(0, b.out.find('\n')));
  EXPECT_EQ(a.out.substr(a.out.find('\n')), b.out.substr(b.out.find('\n')));
}

TEST(Cpmc, WritesOutputAndTextReport) {
  const auto out = temp_path("out.c"), rep = temp_path("report.txt");
  const auto r = cpmc({"--ext", "redundancy", "--ext", "refractive", "--ext", "array", "-o", out.string(),
                       "--emit-report", rep.string(), kGolden + "wdt.cpm"});
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  const std::string report = oracle::read_file(rep.string());
  EXPECT_EQ(report.substr(0, report.find('\n')),
            "extensions_pipeline: cpm://redundancy/1.1;cpm://refractive/0.5;cpm://array/0.5");
  EXPECT_NE(report.find("summary: "), std::string::npos);
  EXPECT_EQ(oracle::read_file(out.string()).rfind("const char *extensions_pipeline", 0), 0u);
  fs::remove(out);
  fs::remove(rep);
}

TEST(Cpmc, JsonReport) {
  const auto rep = temp_path("report.json");
  const auto r = cpmc({"--ext", "redundancy", "--strict-tags", "--emit-report", rep.string(),
                       "--report-format", "json", kGolden + "mixed_strict.cpm"});
  EXPECT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(oracle::read_file(rep.string()));
  EXPECT_EQ(j["extensions_pipeline"], "cpm://redundancy/1.1");
  EXPECT_EQ(j["applied_ids"].size(), 1u);
  ASSERT_FALSE(j["diagnostics"].empty());
  EXPECT_EQ(j["diagnostics"][0]["severity"], "warning");
  EXPECT_TRUE(j["diagnostics"][0].contains("emitted_by"));
  EXPECT_FALSE(r.err.empty());
  fs::remove(rep);
}

TEST(Cpmc, ConfigFile) {
  const auto r = cpmc({"--ext", "redundancy", "--config", kGolden + "five.ini", kGolden + "wdt.cpm"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("cpm_red_storage(watchdog, int, 5);"), std::string::npos);
}

TEST(Cpmc, Errors) {
  EXPECT_EQ(cpmc({}).status, 1);
  EXPECT_EQ(cpmc({"--ext", "redundancy", kData + "missing.cpm"}).status, 1);
  const auto unknown = cpmc({"--ext", "nosuch", kGolden + "table2.cpm"});
  EXPECT_EQ(unknown.status, 1);
  EXPECT_TRUE(unknown.out.empty());
  EXPECT_NE(unknown.err.find("nosuch"), std::string::npos);
  EXPECT_EQ(cpmc({"--ext", "redundancy@9.9", kGolden + "table2.cpm"}).status, 1);
  EXPECT_EQ(cpmc({"--report-format", "xml", kGolden + "table2.cpm"}).status, 1);
  EXPECT_EQ(cpmc({"--config", kData + "missing.ini", kGolden + "table2.cpm"}).status, 1);
}

TEST(Cpmc, ListAndHelp) {
  const auto list = cpmc({"--list-extensions"});
  EXPECT_EQ(list.out, "cpm://array/0.5\ncpm://cyclic/1.0\ncpm://redundancy/1.1\ncpm://refractive/0.5\n");
  const auto help = cpmc({"--help"});
  EXPECT_EQ(help.status, 0);
  EXPECT_NE(help.out.find("--ext"), std::string::npos);
}

TEST(Scenario, Wdt) {
  const auto r = scenario({"wdt", kData + "wdt_heartbeats.ini"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("time_ms,event,detail\n", 0), 0u);
  EXPECT_NE(r.out.find("1000,state,WD_END"), std::string::npos);
  EXPECT_EQ(r.out.find("WD_FIRED"), std::string::npos);
}

TEST(Scenario, WdtRestart) {
  const auto r = scenario({"wdt", kData + "wdt_restart.ini"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("100,state,WD_FIRED"), std::string::npos);
  EXPECT_NE(r.out.find("150,state,WD_ACTIVE"), std::string::npos);
}

TEST(Scenario, SwitchboardToFile) {
  const auto out = temp_path("sb.csv");
  const auto r = scenario({"switchboard", kData + "switchboard.ini", "-o", out.string()});
  EXPECT_EQ(r.status, 0);
  const std::string csv = oracle::read_file(out.string());
  EXPECT_NE(csv.find("3,peer2,stale\n"), std::string::npos);
  EXPECT_NE(csv.find("4,peer2,12\n"), std::string::npos);
  fs::remove(out);
}

TEST(Scenario, Errors) {
  EXPECT_EQ(scenario({}).status, 1);
  EXPECT_EQ(scenario({"wdt"}).status, 1);
  EXPECT_EQ(scenario({"wdt", kData + "missing.ini"}).status, 1);
  EXPECT_EQ(scenario({"wdt", kData + "switchboard.ini"}).status, 1);
}

}  // namespace
}  // namespace cpm::cli
