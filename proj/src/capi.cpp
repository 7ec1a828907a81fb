#include "nsbundle/nsbundle.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <sstream>
#include <string>

#include "nsbundle/bench.hpp"

using namespace nsbundle;
using Eigen::Index;

struct nsb_config {
  SuiteConfig suite;
  bool algorithms_set = false;
};

struct nsb_result {
  RunResult run;
};

struct nsb_report {
  std::vector<ResultRow> rows;
};

namespace {

thread_local std::string g_last_error;

// Distinguishes user-callback aborts from library errors.
struct OracleAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nsb_status fail(nsb_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <class F>
nsb_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return NSB_OK;
  } catch (const Error& e) {
    return fail(static_cast<nsb_status>(static_cast<int>(e.code())), e.what());
  } catch (const OracleAbort& e) {
    return fail(NSB_ERR_ORACLE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NSB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NSB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NSB_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

SolverConfig solver_config(const nsb_config* cfg) {
  SolverConfig c = cfg->suite.base;
  c.algorithm = cfg->suite.algorithms.front();
  return c;
}

}  // namespace

extern "C" {

const char* nsb_last_error(void) { return g_last_error.c_str(); }

const char* nsb_version(void) { return "1.0.0"; }

void nsb_string_free(char* s) { std::free(s); }

int nsb_problem_count(void) { return static_cast<int>(list_problems().size()); }

nsb_status nsb_problem_get(int id, nsb_problem_info* out) {
  return guarded([&] {
    require(out, "out");
    const ProblemSpec& p = problem_by_id(id);
    *out = nsb_problem_info{p.id, p.name.c_str(), p.dimension, p.optimal_value, p.f_inf_default};
  });
}

nsb_status nsb_problem_find(const char* key, int* id) {
  return guarded([&] {
    require(key, "key");
    require(id, "id");
    *id = find_problem(key).id;
  });
}

nsb_status nsb_problem_start_point(int id, double* x, size_t n) {
  return guarded([&] {
    require(x, "x");
    const ProblemSpec& p = problem_by_id(id);
    if (n != static_cast<size_t>(p.dimension)) throw Error(ErrorCode::DimensionMismatch, "start point: wrong length");
    std::copy(p.start_point.data(), p.start_point.data() + n, x);
  });
}

nsb_status nsb_problem_evaluate(int id, const double* x, size_t n, double* f, double* g) {
  return guarded([&] {
    require(x, "x");
    require(f, "f");
    const ProblemSpec& p = problem_by_id(id);
    const OracleResponse r = evaluate(p, Eigen::Map<const Vector>(x, static_cast<Index>(n)));
    *f = r.value;
    if (g != nullptr) std::copy(r.subgradient.data(), r.subgradient.data() + n, g);
  });
}

nsb_status nsb_problems_json(char** out) {
  return guarded([&] {
    require(out, "out");
    *out = dup_string(problems_json());
  });
}

nsb_status nsb_config_new(nsb_config** out) {
  return guarded([&] {
    require(out, "out");
    auto* cfg = new nsb_config;
    cfg->suite.algorithms = {Algorithm::FPCPA};
    *out = cfg;
  });
}

void nsb_config_free(nsb_config* cfg) { delete cfg; }

nsb_status nsb_config_set(nsb_config* cfg, const char* key, double value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    const std::string k = key;
    // Work on a copy so a rejected value leaves the config unchanged.
    SuiteConfig suite = cfg->suite;
    SolverConfig& b = suite.base;
    auto integral = [&](const char* what) {
      if (value != std::floor(value) || std::abs(value) > 1e9)
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be an integer");
      return static_cast<int>(value);
    };
    if (k == "mu") b.mu0 = value;
    else if (k == "kappa") b.kappa = value;
    else if (k == "sigma") b.sigma = value;
    else if (k == "f_inf") suite.f_inf = value;
    else if (k == "max_steps") b.max_steps = integral("max_steps");
    else if (k == "gap_tol") b.gap_tol = value;
    else if (k == "delta_tol") b.delta_tol = value;
    else if (k == "box_radius") b.box_radius = value;
    else if (k == "jobs") suite.parallelism = integral("jobs");
    else if (k == "unbounded_level") b.unbounded_level = value != 0.0;
    else throw Error(ErrorCode::InvalidArgument, "unknown option '" + k + "'");
    b.validate();
    if (suite.f_inf && !std::isfinite(*suite.f_inf)) throw Error(ErrorCode::InvalidArgument, "f_inf must be finite");
    if (suite.parallelism < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be positive");
    cfg->suite = std::move(suite);
  });
}

nsb_status nsb_config_set_string(nsb_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    const std::string k = key;
    if (k == "beta") cfg->suite.base.beta_mode = parse_beta_mode(value);
    else if (k == "trace_dir") cfg->suite.trace_dir = std::filesystem::path(value);
    else throw Error(ErrorCode::InvalidArgument, "unknown option '" + k + "'");
  });
}

nsb_status nsb_config_add_algorithm(nsb_config* cfg, const char* name) {
  return guarded([&] {
    require(cfg, "config");
    require(name, "name");
    std::vector<Algorithm> add;
    if (std::string(name) == "all")
      add = {Algorithm::FPCPA, Algorithm::FLA, Algorithm::FDSA, Algorithm::CPBA};
    else
      add = {parse_algorithm(name)};
    if (!cfg->algorithms_set) cfg->suite.algorithms.clear();
    cfg->algorithms_set = true;
    for (Algorithm a : add)
      if (std::find(cfg->suite.algorithms.begin(), cfg->suite.algorithms.end(), a) == cfg->suite.algorithms.end())
        cfg->suite.algorithms.push_back(a);
  });
}

nsb_status nsb_config_add_problem(nsb_config* cfg, const char* key) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    std::vector<int> add;
    if (std::string(key) == "all")
      for (const auto& p : list_problems()) add.push_back(p.id);
    else
      add = {find_problem(key).id};
    auto& ps = cfg->suite.problems;
    for (int id : add)
      if (std::find(ps.begin(), ps.end(), id) == ps.end()) ps.push_back(id);
    std::sort(ps.begin(), ps.end());
  });
}

nsb_status nsb_solve(const nsb_config* cfg, nsb_oracle_fn oracle, void* user, const double* x0, size_t n,
                     double fstar, nsb_result** out) {
  return guarded([&] {
    require(cfg, "config");
    if (oracle == nullptr) throw Error(ErrorCode::InvalidArgument, "oracle is NULL");
    require(x0, "x0");
    require(out, "out");
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    SolverConfig c = solver_config(cfg);
    if (cfg->suite.f_inf) c.f_inf = *cfg->suite.f_inf;
    if (std::isfinite(fstar)) c.known_fstar = fstar;
    c.validate();
    Oracle wrapped = [oracle, user, n](const Vector& x) {
      OracleResponse r;
      r.subgradient = Vector::Zero(static_cast<Index>(n));
      if (oracle(user, x.data(), n, &r.value, r.subgradient.data()) != 0)
        throw OracleAbort("oracle callback returned an error");
      return r;
    };
    auto* res = new nsb_result;
    res->run = run(c, wrapped, Eigen::Map<const Vector>(x0, static_cast<Index>(n)));
    *out = res;
  });
}

nsb_status nsb_solve_problem(const nsb_config* cfg, int problem_id, nsb_result** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    const ProblemSpec& p = problem_by_id(problem_id);
    SolverConfig c = solver_config(cfg);
    c.f_inf = cfg->suite.f_inf.value_or(p.f_inf_default);
    c.known_fstar = p.optimal_value;
    c.validate();
    auto* res = new nsb_result;
    res->run = run(c, p);
    *out = res;
  });
}

void nsb_result_free(nsb_result* r) { delete r; }

const char* nsb_result_termination(const nsb_result* r) { return r ? to_string(r->run.termination) : ""; }
const char* nsb_result_error(const nsb_result* r) { return r ? r->run.error.c_str() : ""; }
double nsb_result_f_best(const nsb_result* r) {
  return r ? r->run.state.f_best : std::numeric_limits<double>::quiet_NaN();
}
long nsb_result_oracle_calls(const nsb_result* r) { return r ? r->run.state.oracle_calls : 0; }
long nsb_result_steps(const nsb_result* r) { return r ? r->run.state.k : 0; }
size_t nsb_result_dimension(const nsb_result* r) { return r ? static_cast<size_t>(r->run.state.x_best.size()) : 0; }

nsb_status nsb_result_x_best(const nsb_result* r, double* x, size_t n) {
  return guarded([&] {
    require(r, "result");
    require(x, "x");
    const Vector& xb = r->run.state.x_best;
    if (n != static_cast<size_t>(xb.size())) throw Error(ErrorCode::DimensionMismatch, "x_best: wrong length");
    std::copy(xb.data(), xb.data() + n, x);
  });
}

nsb_status nsb_result_trace_jsonl(const nsb_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup_string(trace_jsonl(r->run));
  });
}

nsb_status nsb_run_suite(const nsb_config* cfg, nsb_report** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    auto* rep = new nsb_report;
    try {
      rep->rows = run_suite(cfg->suite);
    } catch (...) {
      delete rep;
      throw;
    }
    *out = rep;
  });
}

void nsb_report_free(nsb_report* rep) { delete rep; }

size_t nsb_report_size(const nsb_report* rep) { return rep ? rep->rows.size() : 0; }

nsb_status nsb_report_row(const nsb_report* rep, size_t i, nsb_row* out) {
  return guarded([&] {
    require(rep, "report");
    require(out, "out");
    if (i >= rep->rows.size()) throw Error(ErrorCode::InvalidArgument, "row index out of range");
    const ResultRow& r = rep->rows[i];
    *out = nsb_row{r.problem_id, r.problem.c_str(), r.algorithm.c_str(), r.k_steps.value_or(-1), r.oracle_calls,
                   r.final_gap, to_string(r.termination), r.error.c_str(), r.wall_seconds};
  });
}

size_t nsb_report_failures(const nsb_report* rep) {
  if (!rep) return 0;
  return static_cast<size_t>(std::count_if(rep->rows.begin(), rep->rows.end(), [](const ResultRow& r) { return r.failed(); }));
}

nsb_status nsb_report_format(const nsb_report* rep, const char* format, char** out) {
  return guarded([&] {
    require(rep, "report");
    require(format, "format");
    require(out, "out");
    *out = dup_string(format_report(rep->rows, parse_report_format(format)));
  });
}

nsb_status nsb_report_write(const nsb_report* rep, const char* format, const char* path) {
  return guarded([&] {
    require(rep, "report");
    require(format, "format");
    require(path, "path");
    emit_report(rep->rows, parse_report_format(format), path);
  });
}

nsb_status nsb_verify_properties(int points, char** summary, int* failures) {
  return guarded([&] {
    require(summary, "summary");
    require(failures, "failures");
    const auto checks = run_property_suites(points);
    std::ostringstream os;
    int bad = 0;
    for (const PropertyCheck& c : checks) {
      char worst[32];
      std::snprintf(worst, sizeof worst, "%.3e", c.worst);
      os << (c.passed ? "ok   " : "FAIL ") << list_problems()[static_cast<size_t>(c.problem_id - 1)].name << ": "
         << c.name << " (worst scaled violation " << worst << ")\n";
      if (!c.passed) ++bad;
    }
    *summary = dup_string(os.str());
    *failures = bad;
  });
}

}  // extern "C"
