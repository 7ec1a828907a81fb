#pragma once

// Accelerated proximal cutting-plane (FPCPA), fast level (FLA) and fast doubly
// stabilized (FDSA) algorithms, and the classical proximal bundle method
// (CPBA) used as the baseline.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "nsbundle/model.hpp"
#include "nsbundle/oracle.hpp"
#include "nsbundle/subqp.hpp"

namespace nsbundle {

enum class Algorithm { FPCPA, FLA, FDSA, CPBA };
enum class Termination { Running, GapReached, DeltaClosed, ZeroSubgradient, MaxSteps, Failed };

const char* to_string(Algorithm a);
const char* to_string(Termination t);
Algorithm parse_algorithm(const std::string& s);
BetaMode parse_beta_mode(const std::string& s);
const char* to_string(BetaMode b);

struct SolverConfig {
  Algorithm algorithm = Algorithm::FPCPA;
  BetaMode beta_mode = BetaMode::Zero;
  double mu0 = 1.0;
  double kappa = 0.8;
  double sigma = 0.5;
  double f_inf = -10.0;
  int max_steps = 500;
  double gap_tol = 1e-6;
  double delta_tol = 1e-6;
  std::optional<double> known_fstar;
  /// FDSA only: run with l = +inf (no level constraint, no lower-bound LP).
  bool unbounded_level = false;
  /// FLA/FDSA: the lower bound minimizes the model over the box
  /// |x - x0|_inf <= box_radius (infinite: whole space).
  double box_radius = 100.0;
  /// mu_inf = mu_floor_factor * |g^0|.
  double mu_floor_factor = 1e-10;
  /// Hard cap on oracle calls for CPBA, whose step limit counts descent
  /// steps only.
  long max_oracle_calls = 20000;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

struct SolverState {
  long k = 0;               // step index; descent steps for CPBA
  Vector x;                 // stability center x^k (x-hat for CPBA)
  Vector y;                 // last iterate y^k
  Vector x0;                // starting point
  Bundle bundle{1};
  NesterovState nesterov;
  double f_best = kInf;
  Vector x_best;
  double f_low = -kInf;
  double delta = kInf;
  double level = kInf;
  double mu_k = 1.0;
  double gamma_prev = 0.0;
  double theta = 0.0;
  double eps_last = 0.0;
  long oracle_calls = 0;
  double mu_floor = 0.0;

  double f_y = 0.0;  // oracle at y^k (at the last trial point for CPBA)
  Vector g_y;
  double f_center = 0.0;  // CPBA: f(x-hat)
  Vector g_center;

  std::optional<double> t0;
  long degenerate_subproblems = 0;
  long subproblems = 0;
  double max_kkt_scaled = 0.0;
  double max_model_gap = 0.0;  // FDSA: max |model(y^{k+1}) - r^k|
  Termination termination = Termination::Running;
};

/// One row per oracle call. Fields that do not apply to an algorithm (or to
/// the initial evaluation) are NaN.
struct IterationRecord {
  long k = 0;
  double f_y = 0.0;
  double f_best = 0.0;
  double f_low = 0.0;
  double delta = 0.0;
  double level = 0.0;
  double mu_k = 0.0;
  double t_k = 0.0;
  double tau_k = 0.0;
  double eps_k = 0.0;
  double theta_k = 0.0;
  double step_norm = 0.0;
  double gamma_k = 0.0;
  std::optional<bool> descent_flag;  // CPBA only
};

/// y_next + alpha_k (y_next - y_prev) + beta_k (y_next - x_prev).
Vector update_center(const Vector& y_next, const Vector& y_prev, const Vector& x_prev, const NesterovState& nesterov);

/// theta_{k+1} = theta_k + eps_k - theta_k / lambda_k.
double accumulate_error(double theta_k, double eps_k, double lambda_k);

/// Evaluates the oracle at x0 and sets up the state. Appends the record for
/// the initial call to `trace`.
SolverState initialize(const SolverConfig& config, const Oracle& oracle, const Vector& x0,
                       std::vector<IterationRecord>& trace);

/// Applies the algorithm's stopping rules to the current state, setting
/// `state.termination` when one fires. For FLA/FDSA this also refreshes
/// f_low, delta and level. Returns true if the run should stop.
bool check_stop(SolverState& state, const SolverConfig& config);

// One step each: a subproblem solve followed by one oracle call.
// Preconditions: check_stop() returned false for this state.
void step_fpcpa(SolverState& state, const SolverConfig& config, const Oracle& oracle,
                std::vector<IterationRecord>& trace);
void step_fla(SolverState& state, const SolverConfig& config, const Oracle& oracle,
              std::vector<IterationRecord>& trace);
void step_fdsa(SolverState& state, const SolverConfig& config, const Oracle& oracle,
               std::vector<IterationRecord>& trace);
/// One inner iteration of the proximal bundle method (serious or null step).
void step_cpba(SolverState& state, const SolverConfig& config, const Oracle& oracle,
               std::vector<IterationRecord>& trace);

struct RunResult {
  SolverConfig config;
  std::string problem;
  SolverState state;
  std::vector<IterationRecord> trace;
  Termination termination = Termination::Running;
  std::string error;  // set when termination == Failed
  double wall_seconds = 0.0;

  double final_gap() const;  // f_best - known f*, NaN when unknown
};

/// Runs until a stopping rule fires. Oracle or subproblem failures end the
/// run with Termination::Failed and the partial trace.
RunResult run(const SolverConfig& config, const Oracle& oracle, const Vector& x0, std::string problem_name = {});
RunResult run(const SolverConfig& config, const ProblemSpec& problem);

/// Smallest slack of the complexity estimate
///   f(y^k) - f(x_ref) <= c mu |x0 - x_ref|^2 / (t0 (k+1)^2) + theta_k
/// over the records k >= 1, where c = 2 (Zero) or 1 (Guler) and t0 = 1 for
/// FPCPA. Negative means violated. Only FPCPA, FLA and FDSA traces qualify.
double complexity_bound_slack(const RunResult& result, const Vector& x0, const Vector& x_ref, double f_ref);

/// JSON-lines: a header object (config, problem, termination) then one
/// object per record.
std::string trace_jsonl(const RunResult& result);

}  // namespace nsbundle
