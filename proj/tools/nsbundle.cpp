#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsbundle/nsbundle.h"

namespace {

int report_error(const char* context) {
  std::fprintf(stderr, "nsbundle: %s: %s\n", context, nsb_last_error());
  return 2;
}

struct RunOptions {
  std::vector<std::string> algorithms{"fpcpa"};
  std::string beta = "zero";
  std::vector<std::string> problems{"all"};
  double mu = 1.0;
  double kappa = 0.8;
  double sigma = 0.5;
  double f_inf = 0.0;
  bool f_inf_set = false;
  int max_steps = 500;
  double gap_tol = 1e-6;
  double delta_tol = 1e-6;
  std::string report = "md";
  std::string out;
  std::string trace_dir;
  int jobs = 1;
};

int do_run(const RunOptions& o) {
  nsb_config* cfg = nullptr;
  if (nsb_config_new(&cfg) != NSB_OK) return report_error("config");
  auto check = [&](nsb_status s, const char* what) {
    if (s == NSB_OK) return true;
    report_error(what);
    return false;
  };
  bool ok = true;
  for (const auto& a : o.algorithms) ok = ok && check(nsb_config_add_algorithm(cfg, a.c_str()), "--algo");
  for (const auto& p : o.problems) ok = ok && check(nsb_config_add_problem(cfg, p.c_str()), "--problem");
  ok = ok && check(nsb_config_set_string(cfg, "beta", o.beta.c_str()), "--beta") &&
       check(nsb_config_set(cfg, "mu", o.mu), "--mu") && check(nsb_config_set(cfg, "kappa", o.kappa), "--kappa") &&
       check(nsb_config_set(cfg, "sigma", o.sigma), "--sigma") &&
       check(nsb_config_set(cfg, "max_steps", o.max_steps), "--max-steps") &&
       check(nsb_config_set(cfg, "gap_tol", o.gap_tol), "--gap-tol") &&
       check(nsb_config_set(cfg, "delta_tol", o.delta_tol), "--delta-tol") &&
       check(nsb_config_set(cfg, "jobs", o.jobs), "--jobs");
  if (ok && o.f_inf_set) ok = check(nsb_config_set(cfg, "f_inf", o.f_inf), "--f-inf");
  if (ok && !o.trace_dir.empty()) ok = check(nsb_config_set_string(cfg, "trace_dir", o.trace_dir.c_str()), "--trace-dir");

  nsb_report* rep = nullptr;
  if (ok) ok = check(nsb_run_suite(cfg, &rep), "run");
  nsb_config_free(cfg);
  if (!ok) return 2;

  if (!o.out.empty()) {
    ok = check(nsb_report_write(rep, o.report.c_str(), o.out.c_str()), "--out");
  } else {
    char* text = nullptr;
    ok = check(nsb_report_format(rep, o.report.c_str(), &text), "--report");
    if (ok) std::fputs(text, stdout);
    nsb_string_free(text);
  }
  const size_t failures = nsb_report_failures(rep);
  for (size_t i = 0; i < nsb_report_size(rep); ++i) {
    nsb_row row;
    if (nsb_report_row(rep, i, &row) == NSB_OK && row.error[0] != '\0')
      std::fprintf(stderr, "%s on %s: %s\n", row.algorithm, row.problem, row.error);
  }
  nsb_report_free(rep);
  if (!ok) return 2;
  return failures == 0 ? 0 : 1;
}

int do_problems(bool json) {
  if (json) {
    char* text = nullptr;
    if (nsb_problems_json(&text) != NSB_OK) return report_error("problems");
    std::printf("%s\n", text);
    nsb_string_free(text);
    return 0;
  }
  std::printf("%3s  %-13s %4s  %14s  %7s\n", "id", "name", "n", "f*", "f_inf");
  for (int id = 1; id <= nsb_problem_count(); ++id) {
    nsb_problem_info info;
    if (nsb_problem_get(id, &info) != NSB_OK) return report_error("problems");
    std::printf("%3d  %-13s %4d  %14.6f  %7g\n", info.id, info.name, info.dimension, info.optimal_value,
                info.f_inf_default);
  }
  return 0;
}

int do_verify(int points) {
  char* summary = nullptr;
  int failures = 0;
  if (nsb_verify_properties(points, &summary, &failures) != NSB_OK) return report_error("verify");
  std::fputs(summary, stdout);
  nsb_string_free(summary);
  std::printf("%d failing check(s)\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated bundle methods for nonsmooth convex minimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nsb_version());

  RunOptions o;
  auto* run = app.add_subcommand("run", "Run algorithms on registry problems");
  run->add_option("--algo", o.algorithms, "fpcpa, fla, fdsa, cpba or all (repeatable)")->take_all();
  run->add_option("--beta", o.beta, "Momentum mode: zero or guler")->capture_default_str();
  run->add_option("--problem", o.problems, "Problem id, name or all (repeatable)")->take_all();
  run->add_option("--mu", o.mu, "Initial proximity parameter")->capture_default_str();
  run->add_option("--kappa", o.kappa, "Level parameter in (0,1)")->capture_default_str();
  run->add_option("--sigma", o.sigma, "CPBA descent parameter in (0,1)")->capture_default_str();
  auto* finf = run->add_option("--f-inf", o.f_inf, "Model floor for every problem (default: per problem)");
  run->add_option("--max-steps", o.max_steps, "Oracle-call cap (CPBA: descent steps)")->capture_default_str();
  run->add_option("--gap-tol", o.gap_tol, "Relative gap tolerance")->capture_default_str();
  run->add_option("--delta-tol", o.delta_tol, "Stop when f_best - f_low falls below this")->capture_default_str();
  run->add_option("--report", o.report, "csv, json or md")->capture_default_str();
  run->add_option("--out", o.out, "Write the report here instead of stdout");
  run->add_option("--trace-dir", o.trace_dir, "Write one JSON-lines trace per run here");
  run->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  bool json = false;
  auto* problems = app.add_subcommand("problems", "List the test problems");
  problems->add_flag("--json", json, "Print JSON instead of a table");

  int points = 100;
  auto* verify = app.add_subcommand("verify", "Run the oracle and model property checks");
  verify->add_option("--points", points, "Samples per problem")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    o.f_inf_set = finf->count() > 0;
    return do_run(o);
  }
  if (*problems) return do_problems(json);
  return do_verify(points);
}
