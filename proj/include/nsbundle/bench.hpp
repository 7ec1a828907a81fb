#pragma once

// Suite runner over the test-problem registry, plus report writers.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsbundle/solvers.hpp"

namespace nsbundle {

enum class ReportFormat { Csv, Json, Markdown };

ReportFormat parse_report_format(const std::string& s);

struct SuiteConfig {
  std::vector<Algorithm> algorithms;
  std::vector<int> problems;
  /// Shared solver settings. Its f_inf and known_fstar are replaced per
  /// problem (registry defaults, then the overrides below).
  SolverConfig base;
  std::optional<double> f_inf;            // applies to every problem
  std::map<int, double> f_inf_overrides;  // per problem id, wins over f_inf
  ReportFormat format = ReportFormat::Csv;
  std::optional<std::filesystem::path> trace_dir;
  int parallelism = 1;

  void validate() const;
};

/// All four algorithms on problems 1..15 with the defaults.
SuiteConfig default_suite();

struct ResultRow {
  int problem_id = 0;
  std::string problem;
  std::string algorithm;          // FPCPA1, FDSA2, CPBA, ...
  std::optional<long> k_steps;    // CPBA only
  long oracle_calls = 0;
  double final_gap = 0.0;
  Termination termination = Termination::Running;
  std::string error;
  double wall_seconds = 0.0;      // not written to csv

  bool failed() const { return termination == Termination::Failed; }
};

bool operator==(const ResultRow& a, const ResultRow& b);  // ignores wall time

/// "FPCPA1"/"FPCPA2" etc. by momentum mode; CPBA has a single variant.
std::string variant_name(Algorithm algorithm, BetaMode beta);

ResultRow make_row(const ProblemSpec& problem, const RunResult& result);

/// Runs every (algorithm, problem) pair on a pool of `parallelism` workers.
/// Rows come back grouped by algorithm in config order, then by problem id.
/// Run failures become rows with Termination::Failed.
std::vector<ResultRow> run_suite(const SuiteConfig& config);

std::string format_report(const std::vector<ResultRow>& rows, ReportFormat format);
void emit_report(const std::vector<ResultRow>& rows, ReportFormat format, const std::filesystem::path& path);
std::vector<ResultRow> parse_csv(const std::string& text);

struct PropertyCheck {
  std::string name;
  int problem_id = 0;
  bool passed = false;
  double worst = 0.0;  // largest scaled violation seen (negative: margin)
};

/// Subgradient inequality on random pairs and the lower-model property of a
/// FPCPA bundle on random points, `points` samples per problem.
std::vector<PropertyCheck> run_property_suites(int points = 100, std::uint64_t seed = 20240601,
                                               double tolerance = 1e-9);

}  // namespace nsbundle
