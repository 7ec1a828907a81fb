#include "nsbundle/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace nsbundle {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::FPCPA: return "FPCPA";
    case Algorithm::FLA: return "FLA";
    case Algorithm::FDSA: return "FDSA";
    case Algorithm::CPBA: return "CPBA";
  }
  return "?";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Running: return "Running";
    case Termination::GapReached: return "GapReached";
    case Termination::DeltaClosed: return "DeltaClosed";
    case Termination::ZeroSubgradient: return "ZeroSubgradient";
    case Termination::MaxSteps: return "MaxSteps";
    case Termination::Failed: return "Failed";
  }
  return "?";
}

const char* to_string(BetaMode b) { return b == BetaMode::Guler ? "guler" : "zero"; }

Algorithm parse_algorithm(const std::string& s) {
  const std::string l = lower(s);
  if (l == "fpcpa") return Algorithm::FPCPA;
  if (l == "fla") return Algorithm::FLA;
  if (l == "fdsa") return Algorithm::FDSA;
  if (l == "cpba") return Algorithm::CPBA;
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + s + "'");
}

BetaMode parse_beta_mode(const std::string& s) {
  const std::string l = lower(s);
  if (l == "zero") return BetaMode::Zero;
  if (l == "guler") return BetaMode::Guler;
  throw Error(ErrorCode::InvalidArgument, "unknown beta mode '" + s + "'");
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, "SolverConfig: " + m); };
  if (!(mu0 > 0.0) || !std::isfinite(mu0)) fail("mu must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) fail("kappa must lie in (0, 1)");
  if (!(sigma > 0.0 && sigma < 1.0)) fail("sigma must lie in (0, 1)");
  if (!std::isfinite(f_inf)) fail("f_inf must be finite");
  if (max_steps < 1) fail("max_steps must be at least 1");
  if (!(gap_tol >= 0.0) || !(delta_tol >= 0.0)) fail("tolerances must be nonnegative");
  if (known_fstar && !std::isfinite(*known_fstar)) fail("known f* must be finite");
  if (!(box_radius > 0.0)) fail("box radius must be positive");
  if (!(mu_floor_factor >= 0.0)) fail("mu floor factor must be nonnegative");
  if (max_oracle_calls < 1) fail("max_oracle_calls must be at least 1");
}

Vector update_center(const Vector& y_next, const Vector& y_prev, const Vector& x_prev, const NesterovState& nesterov) {
  if (y_next.size() != y_prev.size() || y_next.size() != x_prev.size())
    throw Error(ErrorCode::DimensionMismatch, "update_center: dimension mismatch");
  Vector x = y_next + nesterov.alpha_k * (y_next - y_prev);
  if (nesterov.beta_k != 0.0) x += nesterov.beta_k * (y_next - x_prev);
  return x;
}

double accumulate_error(double theta_k, double eps_k, double lambda_k) {
  return theta_k + eps_k - theta_k / lambda_k;
}

namespace {

struct OracleCall {
  double f;
  Vector g;
};

OracleCall call_oracle(SolverState& s, const Oracle& oracle, const Vector& at) {
  OracleResponse r = oracle(at);
  if (r.subgradient.size() != at.size())
    throw Error(ErrorCode::DimensionMismatch, "oracle returned a subgradient of the wrong dimension");
  if (!std::isfinite(r.value) || !r.subgradient.allFinite())
    throw Error(ErrorCode::NonFinite, "oracle returned a non-finite response");
  ++s.oracle_calls;
  if (r.value < s.f_best) {
    s.f_best = r.value;
    s.x_best = at;
  }
  return {r.value, std::move(r.subgradient)};
}

IterationRecord blank_record(const SolverState& s) {
  IterationRecord rec;
  rec.k = s.k;
  rec.f_y = s.f_y;
  rec.f_best = s.f_best;
  rec.f_low = kNaN;
  rec.delta = kNaN;
  rec.level = kNaN;
  rec.mu_k = kNaN;
  rec.t_k = kNaN;
  rec.tau_k = kNaN;
  rec.eps_k = kNaN;
  rec.theta_k = kNaN;
  rec.step_norm = kNaN;
  rec.gamma_k = kNaN;
  return rec;
}

bool uses_level(const SolverConfig& c) {
  return c.algorithm == Algorithm::FLA || (c.algorithm == Algorithm::FDSA && !c.unbounded_level);
}

void note_subproblem(SolverState& s, const SubproblemInputs& in, const QPSolution& sol) {
  ++s.subproblems;
  if (sol.status == QPStatus::Degenerate) ++s.degenerate_subproblems;
  s.max_kkt_scaled = std::max(s.max_kkt_scaled, sol.kkt_residual / kkt_scale(in));
}

SubproblemInputs inputs_for(const SolverState& s, const SolverConfig& c, const Vector& center) {
  SubproblemInputs in;
  in.bundle = &s.bundle;
  in.center = center;
  in.mu = s.mu_k;
  in.r_floor = c.f_inf;
  return in;
}

// Model value (with the floor) under the current bundle.
double floored_model(const SolverState& s, const SolverConfig& c, const Vector& x) {
  return std::max(model_eval(s.bundle, x).value, c.f_inf);
}

// Shared tail of the accelerated methods: center update, oracle call at
// y^{k+1}, linearization error, error accumulation and bookkeeping.
void finish_accelerated_step(SolverState& s, const SolverConfig& c, const Oracle& oracle, const Vector& y_next,
                             IterationRecord rec, std::vector<IterationRecord>& trace) {
  const Vector x_next = update_center(y_next, s.y, s.x, s.nesterov);
  const double model_at_y = floored_model(s, c, y_next);
  rec.step_norm = (s.x - y_next).norm();

  OracleCall call = call_oracle(s, oracle, y_next);
  const double eps = linearization_error(call.f, model_at_y);
  const double theta_next = accumulate_error(s.theta, eps, s.nesterov.lambda_k);
  s.bundle.add(Cut(y_next, call.f, call.g));

  s.eps_last = eps;
  s.theta = theta_next;
  s.y = y_next;
  s.x = x_next;
  s.f_y = call.f;
  s.g_y = std::move(call.g);
  s.nesterov = nesterov_advance(s.nesterov);
  ++s.k;

  rec.k = s.k;
  rec.f_y = s.f_y;
  rec.f_best = s.f_best;
  rec.eps_k = eps;
  rec.theta_k = theta_next;
  trace.push_back(rec);
}

bool gap_reached(const SolverState& s, const SolverConfig& c) {
  return c.known_fstar && s.f_best - *c.known_fstar <= c.gap_tol * (1.0 + std::abs(s.f_best));
}

void refresh_level(SolverState& s, const SolverConfig& c) {
  const LowerBound lb = std::isfinite(c.box_radius) ? compute_lower_bound(s.bundle, c.f_inf, s.x0, c.box_radius)
                                                     : compute_lower_bound(s.bundle, c.f_inf);
  s.f_low = std::min(std::max(s.f_low, lb.value), s.f_best);
  s.delta = s.f_best - s.f_low;
  s.level = s.f_best - c.kappa * s.delta;
}

}  // namespace

SolverState initialize(const SolverConfig& config, const Oracle& oracle, const Vector& x0,
                       std::vector<IterationRecord>& trace) {
  config.validate();
  if (x0.size() == 0) throw Error(ErrorCode::InvalidArgument, "initialize: empty starting point");
  SolverState s;
  s.bundle = Bundle(x0.size());
  s.x = x0;
  s.y = x0;
  s.x0 = x0;
  s.x_best = x0;
  s.nesterov = NesterovState::initial(config.beta_mode);
  s.mu_k = config.mu0;
  OracleCall call = call_oracle(s, oracle, x0);
  s.f_y = call.f;
  s.g_y = call.g;
  s.f_center = call.f;
  s.g_center = call.g;
  s.mu_floor = config.mu_floor_factor * call.g.norm();
  s.bundle.add(Cut(x0, call.f, std::move(call.g)));
  trace.push_back(blank_record(s));
  return s;
}

bool check_stop(SolverState& s, const SolverConfig& c) {
  if (c.algorithm == Algorithm::CPBA) {
    if (gap_reached(s, c)) {
      s.termination = Termination::GapReached;
    } else if (s.g_center.isZero(0.0)) {
      s.termination = Termination::ZeroSubgradient;
    } else if (s.k >= c.max_steps || s.oracle_calls >= c.max_oracle_calls) {
      s.termination = Termination::MaxSteps;
    }
    return s.termination != Termination::Running;
  }
  if (gap_reached(s, c)) {
    s.termination = Termination::GapReached;
    return true;
  }
  if (uses_level(c)) {
    refresh_level(s, c);
    if (s.delta <= c.delta_tol) {
      s.termination = Termination::DeltaClosed;
      return true;
    }
  }
  if (s.g_y.isZero(0.0)) {
    s.termination = Termination::ZeroSubgradient;
  } else if (s.oracle_calls >= c.max_steps) {
    s.termination = Termination::MaxSteps;
  }
  return s.termination != Termination::Running;
}

void step_fpcpa(SolverState& s, const SolverConfig& c, const Oracle& oracle, std::vector<IterationRecord>& trace) {
  s.mu_k = c.mu0;
  const SubproblemInputs in = inputs_for(s, c, s.x);
  const QPSolution sol = solve_prox_qp(in);
  note_subproblem(s, in, sol);
  if (!s.t0) s.t0 = sol.t;

  IterationRecord rec = blank_record(s);
  rec.mu_k = s.mu_k;
  rec.t_k = sol.t;
  rec.tau_k = sol.tau;
  rec.gamma_k = sol.gamma;
  finish_accelerated_step(s, c, oracle, sol.x, rec, trace);
}

void step_fla(SolverState& s, const SolverConfig& c, const Oracle& oracle, std::vector<IterationRecord>& trace) {
  // f_low, delta and level were refreshed by check_stop.
  s.mu_k = 1.0;
  SubproblemInputs in = inputs_for(s, c, s.x);
  in.level = s.level;
  const QPSolution sol = solve_level_qp(in);
  if (sol.status == QPStatus::Infeasible) {
    std::ostringstream os;
    os << "FLA: empty level set at step " << s.k << " (level " << s.level << ", f_low " << s.f_low << ")";
    throw Error(ErrorCode::Infeasible, os.str());
  }
  note_subproblem(s, in, sol);

  const bool degenerate = sol.status == QPStatus::Degenerate;
  const double t = degenerate ? 1.0 : sol.t;
  if (!s.t0) s.t0 = t;

  IterationRecord rec = blank_record(s);
  rec.f_low = s.f_low;
  rec.delta = s.delta;
  rec.level = s.level;
  rec.mu_k = s.mu_k;
  rec.t_k = t;
  rec.tau_k = sol.tau;
  rec.gamma_k = 1.0 / t;
  finish_accelerated_step(s, c, oracle, degenerate ? Vector(s.x) : sol.x, rec, trace);
}

void step_fdsa(SolverState& s, const SolverConfig& c, const Oracle& oracle, std::vector<IterationRecord>& trace) {
  SubproblemInputs in = inputs_for(s, c, s.x);
  if (!c.unbounded_level) in.level = s.level;
  const QPSolution sol = solve_dsqp(in);
  if (sol.status == QPStatus::Infeasible) {
    std::ostringstream os;
    os << "FDSA: infeasible subproblem at step " << s.k << " (level " << s.level << ")";
    throw Error(ErrorCode::Infeasible, os.str());
  }
  note_subproblem(s, in, sol);
  if (!s.t0) s.t0 = sol.t;
  s.max_model_gap = std::max(s.max_model_gap, std::abs(floored_model(s, c, sol.x) - sol.r));

  IterationRecord rec = blank_record(s);
  if (!c.unbounded_level) {
    rec.f_low = s.f_low;
    rec.delta = s.delta;
    rec.level = s.level;
  }
  rec.mu_k = s.mu_k;
  rec.t_k = sol.t;
  rec.tau_k = sol.tau;
  rec.gamma_k = sol.gamma;
  s.gamma_prev = sol.gamma;
  finish_accelerated_step(s, c, oracle, sol.x, rec, trace);
  s.mu_k = std::max(s.mu_floor, s.gamma_prev);
}

void step_cpba(SolverState& s, const SolverConfig& c, const Oracle& oracle, std::vector<IterationRecord>& trace) {
  s.mu_k = c.mu0;
  const SubproblemInputs in = inputs_for(s, c, s.x);
  const QPSolution sol = solve_prox_qp(in);
  note_subproblem(s, in, sol);

  const Vector z = sol.x;
  const double model_at_z = floored_model(s, c, z);
  const double predicted = s.f_center - model_at_z;
  if (predicted <= 1e-14 * (1.0 + std::abs(s.f_center))) {
    // The center minimizes the model and the model is exact there.
    s.termination = Termination::DeltaClosed;
    return;
  }

  IterationRecord rec = blank_record(s);
  rec.mu_k = s.mu_k;
  rec.t_k = sol.t;
  rec.tau_k = sol.tau;
  rec.gamma_k = sol.gamma;
  rec.step_norm = (s.x - z).norm();

  OracleCall call = call_oracle(s, oracle, z);
  const double eps = linearization_error(call.f, model_at_z);
  s.bundle.add(Cut(z, call.f, call.g));
  s.eps_last = eps;
  s.y = z;
  s.f_y = call.f;
  const bool descent = call.f <= s.f_center - c.sigma * predicted;
  if (descent) {
    s.x = z;
    s.f_center = call.f;
    s.g_center = call.g;
    ++s.k;
  }
  s.g_y = std::move(call.g);

  rec.k = s.k;
  rec.f_y = s.f_y;
  rec.f_best = s.f_best;
  rec.eps_k = eps;
  rec.descent_flag = descent;
  trace.push_back(rec);
}

double RunResult::final_gap() const {
  if (!config.known_fstar) return kNaN;
  return state.f_best - *config.known_fstar;
}

RunResult run(const SolverConfig& config, const Oracle& oracle, const Vector& x0, std::string problem_name) {
  RunResult out;
  out.config = config;
  out.problem = std::move(problem_name);
  const auto t_start = std::chrono::steady_clock::now();
  try {
    out.state = initialize(config, oracle, x0, out.trace);
    while (!check_stop(out.state, config)) {
      switch (config.algorithm) {
        case Algorithm::FPCPA: step_fpcpa(out.state, config, oracle, out.trace); break;
        case Algorithm::FLA: step_fla(out.state, config, oracle, out.trace); break;
        case Algorithm::FDSA: step_fdsa(out.state, config, oracle, out.trace); break;
        case Algorithm::CPBA: step_cpba(out.state, config, oracle, out.trace); break;
      }
      if (out.state.termination != Termination::Running) break;
    }
    out.termination = out.state.termination;
  } catch (const std::exception& e) {
    out.termination = Termination::Failed;
    out.state.termination = Termination::Failed;
    out.error = e.what();
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

RunResult run(const SolverConfig& config, const ProblemSpec& problem) {
  return run(config, make_oracle(problem), problem.start_point, problem.name);
}

double complexity_bound_slack(const RunResult& result, const Vector& x0, const Vector& x_ref, double f_ref) {
  const SolverConfig& c = result.config;
  if (c.algorithm == Algorithm::CPBA) throw Error(ErrorCode::InvalidArgument, "complexity bound: not defined for CPBA");
  const double factor = c.beta_mode == BetaMode::Guler ? 1.0 : 2.0;
  // The level projection is mu-free: its multiplier already carries the scale.
  const double mu = c.algorithm == Algorithm::FLA ? 1.0 : c.mu0;
  const double t0 = c.algorithm == Algorithm::FPCPA ? 1.0 : result.state.t0.value_or(1.0);
  const double dist2 = (x0 - x_ref).squaredNorm();
  double slack = kInf;
  for (const IterationRecord& r : result.trace) {
    if (r.k < 1) continue;
    const double kp1 = static_cast<double>(r.k + 1);
    const double bound = factor * mu * dist2 / (t0 * kp1 * kp1) + r.theta_k;
    slack = std::min(slack, bound - (r.f_y - f_ref));
  }
  return slack;
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string trace_jsonl(const RunResult& result) {
  const SolverConfig& c = result.config;
  nlohmann::json header = {
      {"type", "header"},
      {"problem", result.problem},
      {"algorithm", to_string(c.algorithm)},
      {"beta", to_string(c.beta_mode)},
      {"mu", c.mu0},
      {"kappa", c.kappa},
      {"sigma", c.sigma},
      {"f_inf", c.f_inf},
      {"max_steps", c.max_steps},
      {"gap_tol", c.gap_tol},
      {"delta_tol", c.delta_tol},
      {"known_fstar", c.known_fstar ? num(*c.known_fstar) : nlohmann::json(nullptr)},
      {"unbounded_level", c.unbounded_level},
      {"termination", to_string(result.termination)},
      {"oracle_calls", result.state.oracle_calls},
      {"k_steps", result.state.k},
      {"f_best", num(result.state.f_best)},
  };
  if (!result.error.empty()) header["error"] = result.error;
  std::ostringstream os;
  os << header.dump() << '\n';
  for (const IterationRecord& r : result.trace) {
    nlohmann::json row = {
        {"k", r.k},
        {"f_y", num(r.f_y)},
        {"f_best", num(r.f_best)},
        {"f_low", num(r.f_low)},
        {"delta", num(r.delta)},
        {"level", num(r.level)},
        {"mu_k", num(r.mu_k)},
        {"t_k", num(r.t_k)},
        {"tau_k", num(r.tau_k)},
        {"eps_k", num(r.eps_k)},
        {"theta_k", num(r.theta_k)},
        {"step_norm", num(r.step_norm)},
        {"gamma_k", num(r.gamma_k)},
        {"descent_flag", r.descent_flag ? nlohmann::json(*r.descent_flag) : nlohmann::json(nullptr)},
    };
    os << row.dump() << '\n';
  }
  return os.str();
}

}  // namespace nsbundle
