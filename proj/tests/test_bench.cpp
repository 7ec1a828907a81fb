#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nsbundle/bench.hpp"

using namespace nsbundle;

namespace {

SuiteConfig small_suite() {
  SuiteConfig c = default_suite();
  c.problems = {1, 2, 3, 9};
  return c;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("default suite") {
  const SuiteConfig c = default_suite();
  CHECK(c.algorithms.size() == 4);
  CHECK(c.problems.size() == 15);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("invalid suites are rejected before running") {
  SuiteConfig c = default_suite();
  c.algorithms.clear();
  CHECK_THROWS_AS(run_suite(c), Error);
  c = default_suite();
  c.problems = {16};
  CHECK_THROWS_AS(run_suite(c), Error);
  c = default_suite();
  c.parallelism = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
  CHECK(parse_report_format("markdown") == ReportFormat::Markdown);
}

TEST_CASE("variant names") {
  CHECK(variant_name(Algorithm::FPCPA, BetaMode::Zero) == "FPCPA1");
  CHECK(variant_name(Algorithm::FDSA, BetaMode::Guler) == "FDSA2");
  CHECK(variant_name(Algorithm::CPBA, BetaMode::Guler) == "CPBA");
}

TEST_CASE("rows are ordered by algorithm then problem") {
  SuiteConfig c = small_suite();
  c.algorithms = {Algorithm::CPBA, Algorithm::FPCPA};
  const auto rows = run_suite(c);
  REQUIRE(rows.size() == 8);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rows[i].algorithm == "CPBA");
    CHECK(rows[i].k_steps.has_value());
    CHECK(rows[i + 4].algorithm == "FPCPA1");
    CHECK_FALSE(rows[i + 4].k_steps.has_value());
    CHECK(rows[i].problem_id == c.problems[i]);
  }
}

TEST_CASE("serial and parallel runs agree") {
  SuiteConfig c = small_suite();
  const auto serial = run_suite(c);
  c.parallelism = 3;
  const auto parallel = run_suite(c);
  CHECK(serial == parallel);
  CHECK(format_report(serial, ReportFormat::Csv) == format_report(parallel, ReportFormat::Csv));
}

TEST_CASE("csv round trip") {
  auto rows = run_suite(small_suite());
  rows[0].termination = Termination::Failed;
  rows[0].error = "bad \"value\", at step 3";
  const std::string csv = format_report(rows, ReportFormat::Csv);
  CHECK(csv.rfind("problem_id,problem,algorithm,k_steps,oracle_calls,final_gap,termination,error\n", 0) == 0);
  CHECK(csv.find("wall") == std::string::npos);
  const auto back = parse_csv(csv);
  CHECK(back == rows);
  CHECK(format_report(back, ReportFormat::Csv) == csv);
}

TEST_CASE("markdown has one table per algorithm") {
  const auto rows = run_suite(small_suite());
  const std::string md = format_report(rows, ReportFormat::Markdown);
  CHECK(count(md, "### ") == 4);
  CHECK(count(md, "| # | Problem | #k | #fg | f - f* | Termination |") == 4);
  for (const char* name : {"### FPCPA1", "### FLA1", "### FDSA1", "### CPBA"}) CHECK(md.find(name) != std::string::npos);
  CHECK(count(md, "| Shor |") == 4);
}

TEST_CASE("json report") {
  const auto rows = run_suite(small_suite());
  const auto js = nlohmann::json::parse(format_report(rows, ReportFormat::Json));
  REQUIRE(js.is_array());
  CHECK(js.size() == rows.size());
  CHECK(js[0].contains("wall_seconds"));
  CHECK(js[0]["problem"] == rows[0].problem);
}

TEST_CASE("traces and report files") {
  const auto dir = std::filesystem::temp_directory_path() / "nsbundle_bench_test";
  std::filesystem::remove_all(dir);
  SuiteConfig c = small_suite();
  c.algorithms = {Algorithm::FDSA};
  c.trace_dir = dir;
  const auto rows = run_suite(c);
  for (int id : c.problems) {
    const auto path = dir / ("FDSA1_" + std::to_string(id) + ".jsonl");
    CHECK(std::filesystem::exists(path));
  }
  emit_report(rows, ReportFormat::Csv, dir / "out.csv");
  std::ifstream in(dir / "out.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(parse_csv(ss.str()) == rows);
  std::filesystem::remove_all(dir);
}

TEST_CASE("f_inf overrides apply per problem") {
  SuiteConfig c = small_suite();
  c.algorithms = {Algorithm::FLA};
  c.problems = {3};
  const auto base = run_suite(c);
  c.f_inf_overrides[3] = -1000.0;
  const auto moved = run_suite(c);
  CHECK(base[0].oracle_calls != moved[0].oracle_calls);
}

TEST_CASE("known hard cases") {
  SuiteConfig c = default_suite();
  c.algorithms = {Algorithm::CPBA};
  c.problems = {14};
  const auto cpba = run_suite(c);
  CHECK(cpba[0].termination == Termination::MaxSteps);
  CHECK(cpba[0].final_gap > 1e-6);
  CHECK(cpba[0].final_gap < 1e-3);

  c.algorithms = {Algorithm::FDSA};
  c.problems = {13};
  const auto fdsa = run_suite(c);
  CHECK(fdsa[0].termination == Termination::GapReached);
  CHECK(fdsa[0].final_gap <= 1e-6);
}

TEST_CASE("property suites pass") {
  const auto checks = run_property_suites(30);
  CHECK(checks.size() == 30);
  for (const auto& c : checks) {
    CAPTURE(c.name);
    CAPTURE(c.problem_id);
    CHECK(c.passed);
  }
}

}
