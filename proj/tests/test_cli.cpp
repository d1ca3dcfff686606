#include <sys/wait.h>

#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stec/cli.hpp"
#include "test_util.hpp"

using namespace stec;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout + stderr
};

/// Runs the stec binary with its output dir redirected to `dir`.
Run run_cli(const std::filesystem::path& dir, const std::string& args) {
  const auto log = dir / "cli.log";
  const std::string cmd = "STEC_OUTPUT_DIR='" + dir.string() + "' '" + STEC_CLI_PATH + "' " + args + " > '" +
                          log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, test::read_file(log)};
}

std::string cfg(const std::string& name) { return "--config '" + test::data("cli/" + name) + "'"; }

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// ingest

TEST(CliIngest, TwoFileFixtureSummarised) {
  auto dir = test::scratch_dir("cli_ingest_ok");
  auto r = run_cli(dir, cfg("project.ini") + " ingest");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("datasets: 2"), std::string::npos);
  EXPECT_NE(r.output.find("ie: ie_hourly.csv records=2112 warnings=0"), std::string::npos);
  EXPECT_NE(r.output.find("it: it_daily.csv records=66 warnings=0"), std::string::npos);
  EXPECT_NE(r.output.find("IE resolution=hour coverage=[2021-01-01T00:00:00Z"), std::string::npos);
}

TEST(CliIngest, BadRowFailsAndCitesRow) {
  auto dir = test::scratch_dir("cli_ingest_bad");
  auto r = run_cli(dir, cfg("project_bad.ini") + " ingest");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("row 3"), std::string::npos) << r.output;
}

TEST(CliIngest, LenientSkipsBadRowWithOneWarning) {
  auto dir = test::scratch_dir("cli_ingest_lenient");
  auto r = run_cli(dir, cfg("project_bad.ini") + " --lenient ingest");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("records=2 warnings=1"), std::string::npos) << r.output;
}

TEST(CliIngest, UnknownConfigKeyIsUserError) {
  auto dir = test::scratch_dir("cli_ingest_key");
  auto r = run_cli(dir, cfg("project_unknown_key.ini") + " ingest");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("unknown key"), std::string::npos);
}

TEST(CliIngest, MissingConfigFlagIsUserError) {
  auto dir = test::scratch_dir("cli_no_config");
  EXPECT_EQ(run_cli(dir, "ingest").code, 2);
}

// ---------------------------------------------------------------------------
// intensity

TEST(CliIntensity, SeasonBucketsOverHourlyData) {
  auto dir = test::scratch_dir("cli_int_season");
  auto r = run_cli(dir, cfg("project.ini") + " intensity --region IE --bucket season --out s.csv");
  ASSERT_EQ(r.code, 0) << r.output;
  auto lines = lines_of(test::read_file(dir / "s.csv"));
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "spatial_unit,bucket_kind,bucket_key,ci_g_per_kwh,total_energy_kwh");
  EXPECT_EQ(lines[1].rfind("IE,season,2021-winter,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("IE,season,2021-fall,", 0), 0u);
}

TEST(CliIntensity, ZoneByYearIsOneRow) {
  auto dir = test::scratch_dir("cli_int_zone");
  auto r = run_cli(dir, cfg("project.ini") + " intensity --zone EU --bucket year --out z.json");
  ASSERT_EQ(r.code, 0) << r.output;
  auto doc = nlohmann::json::parse(test::read_file(dir / "z.json"));
  ASSERT_EQ(doc["points"].size(), 1u);
  EXPECT_EQ(doc["points"][0]["bucket_key"], "2021");
}

TEST(CliIntensity, DayFromYearlyDataIsResolutionError) {
  auto dir = test::scratch_dir("cli_int_res");
  auto r = run_cli(dir, cfg("project_yearly.ini") + " intensity --region IE --bucket day");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("resolution"), std::string::npos) << r.output;
}

// ---------------------------------------------------------------------------
// embodied

TEST(CliEmbodied, CountrySeasonIsOneValuePerCountryAndSeason) {
  auto dir = test::scratch_dir("cli_emb_cs");
  auto r = run_cli(dir, cfg("project.ini") + " embodied --hardware cpu:7nm --model cs --units IE,IT --out cs.csv");
  ASSERT_EQ(r.code, 0) << r.output;
  auto lines = lines_of(test::read_file(dir / "cs.csv"));
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[0], "unit,bucket_key,embodied,unit_of_measure");
  std::set<std::pair<std::string, std::string>> cells;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto c1 = lines[i].find(','), c2 = lines[i].find(',', c1 + 1);
    cells.emplace(lines[i].substr(0, c1), lines[i].substr(c1 + 1, c2 - c1 - 1));
    EXPECT_TRUE(lines[i].ends_with(",g/cm2"));
  }
  EXPECT_EQ(cells.size(), 8u);
}

TEST(CliEmbodied, GlobalYearPrintsScalar) {
  auto dir = test::scratch_dir("cli_emb_gy");
  auto r = run_cli(dir, cfg("project.ini") + " embodied --model gy --units IE,IT --out gy.csv");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("cpu:7nm STEC-GY = "), std::string::npos) << r.output;
  EXPECT_EQ(lines_of(test::read_file(dir / "gy.csv")).size(), 2u);
}

TEST(CliEmbodied, UnsupportedCellIsUserError) {
  auto dir = test::scratch_dir("cli_emb_td");
  auto r = run_cli(dir, cfg("project.ini") + " embodied --model td --units IE");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("unsupported granularity"), std::string::npos);
}

TEST(CliEmbodied, UnknownHardwareIsUserError) {
  auto dir = test::scratch_dir("cli_emb_hw");
  EXPECT_EQ(run_cli(dir, cfg("project.ini") + " embodied --hardware cpu:1nm --units IE").code, 2);
}

// ---------------------------------------------------------------------------
// compare

TEST(CliCompare, ZoneFixtureMatchesGoldenBytes) {
  auto dir = test::scratch_dir("cli_cmp_golden");
  const std::string args = "--config '" + test::data("table4/project.ini") +
                           "' compare --hardware 'cpu:7nm;ssd:Zone SSD;hdd:Zone HDD' --model zy --units EU,ASEAN"
                           " --out c.csv";
  auto r = run_cli(dir, args);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto got = test::read_file(dir / "c.csv");
  EXPECT_EQ(got, test::read_file(test::data("table4/golden_compare.csv")));
  EXPECT_EQ(lines_of(got)[1].rfind("CPU,18.66,", 0), 0u);

  auto doc = nlohmann::json::parse(test::read_file(dir / "c.json"));
  ASSERT_EQ(doc.size(), 3u);
  EXPECT_EQ(doc[0]["per_point"].size(), 2u);
}

TEST(CliCompare, SinglePointAgainstItselfIsZero) {
  auto dir = test::scratch_dir("cli_cmp_single");
  auto r = run_cli(dir, "--config '" + test::data("table4/project.ini") +
                            "' compare --model zy --units EU --out one.csv");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(lines_of(test::read_file(dir / "one.csv"))[1], "CPU,0.00,0.00");
}

TEST(CliCompare, MissingBaselineCoverageIsUserError) {
  auto dir = test::scratch_dir("cli_cmp_cov");
  auto r = run_cli(dir, "--config '" + test::data("table4/project.ini") +
                            "' compare --model zy --units EU,ASEAN --baseline-units EU,ASEAN,TW");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("baseline coverage"), std::string::npos) << r.output;
}

// ---------------------------------------------------------------------------
// plotdata

TEST(CliPlot, StormColumns) {
  auto dir = test::scratch_dir("cli_plot_storm");
  auto r = run_cli(dir, cfg("project.ini") +
                            " plotdata --figure storm --units IE --from 2021-01-15 --to 2021-01-16 --out st.csv");
  ASSERT_EQ(r.code, 0) << r.output;
  auto lines = lines_of(test::read_file(dir / "st.csv"));
  ASSERT_EQ(lines.size(), 25u);
  EXPECT_EQ(lines[0],
            "time,ci_g_per_kwh,embodied_g_per_cm2,oil_kwh,coal_kwh,natural_gas_kwh,nuclear_kwh,wind_kwh,solar_kwh,"
            "hydro_kwh,geothermal_kwh,biomass_kwh,other_kwh");
  EXPECT_EQ(lines[1].rfind("2021-01-15T00:00:00Z,", 0), 0u);
}

TEST(CliPlot, EmptySpanIsUserError) {
  auto dir = test::scratch_dir("cli_plot_empty");
  auto r = run_cli(dir, cfg("project.ini") + " plotdata --figure storm --units IE --from 2025-01-01 --to 2025-01-02");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("no data in the requested span"), std::string::npos);
}

TEST(CliPlot, TimelineHasBaselineColumn) {
  auto dir = test::scratch_dir("cli_plot_cd");
  auto r = run_cli(dir, cfg("project.ini") + " plotdata --figure cd-timeline --units IE,IT --out cd.csv");
  ASSERT_EQ(r.code, 0) << r.output;
  auto lines = lines_of(test::read_file(dir / "cd.csv"));
  EXPECT_EQ(lines[0], "unit,bucket_key,ci_g_per_kwh,embodied,gy_baseline");
  EXPECT_EQ(lines.size(), 1u + 22u + 22u);
}

TEST(CliPlot, RepeatedRunsAreByteIdentical) {
  auto a = test::scratch_dir("cli_det_a");
  auto b = test::scratch_dir("cli_det_b");
  const std::string args = cfg("project.ini") + " plotdata --figure storm --units IE --out p.csv";
  ASSERT_EQ(run_cli(a, args).code, 0);
  ASSERT_EQ(run_cli(b, args).code, 0);
  EXPECT_EQ(test::read_file(a / "p.csv"), test::read_file(b / "p.csv"));
  EXPECT_FALSE(test::read_file(a / "p.csv").empty());
}

// ---------------------------------------------------------------------------
// in-process

TEST(CliInProcess, GuardedMapsExceptionClasses) {
  std::ostringstream err;
  EXPECT_EQ(cli::guarded([] { return 0; }, err), cli::kOk);
  EXPECT_EQ(cli::guarded([]() -> int { throw DataError("bad input"); }, err), cli::kUserError);
  EXPECT_EQ(cli::guarded([]() -> int { throw std::logic_error("bug"); }, err), cli::kInternal);
  EXPECT_NE(err.str().find("error: bad input"), std::string::npos);
  EXPECT_NE(err.str().find("internal error: bug"), std::string::npos);
}

TEST(CliInProcess, CompareReportsMatchTableRow) {
  auto project = load_project(load_config(test::data("table4/project.ini")), false);
  cli::CompareArgs args;
  args.hardware = {"cpu:7nm"};
  args.units = {"EU", "ASEAN"};
  auto reports = cli::run_compare(project, args);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_NEAR(reports[0].baseline, 1557.49, 0.01);
  EXPECT_NEAR(reports[0].avg_diff_pct, 18.65, 0.05);
}

TEST(CliInProcess, IngestSummaryQuiet) {
  auto project = load_project(load_config(test::data("cli/project.ini")), false);
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_ingest(project, out, true), cli::kOk);
  EXPECT_EQ(out.str(), "ie: ie_hourly.csv records=2112 warnings=0\nit: it_daily.csv records=66 warnings=0\n");
}
