#pragma once

// Stabilized quadratic subproblems over a cutting-plane model, all written in
// epigraph form over (x, r):
//
//   prox:   min r + mu/2 |x - c|^2   s.t. cut_i(x) <= r, r >= r_floor
//   level:  min 1/2 |x - c|^2        s.t. cut_i(x) <= l   (r_floor <= l)
//   dsqp:   min r + mu/2 |x - c|^2   s.t. cut_i(x) <= r, r_floor <= r <= l
//
// plus the lower-bound LP  min r s.t. cut_i(x) <= r, r >= r_floor.
// The floor r >= r_floor behaves as an extra cut with zero slope.

#include <iosfwd>
#include <limits>
#include <string>

#include "nsbundle/model.hpp"

namespace nsbundle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class QPStatus { Optimal, Infeasible, Degenerate };
enum class SubproblemKind { Prox, Level, DoublyStabilized };

const char* to_string(QPStatus s);

struct SubproblemInputs {
  const Bundle* bundle = nullptr;
  Vector center;
  double mu = 1.0;     // unused by the level projection
  double level = kInf;
  double r_floor = -kInf;
};

struct QPSolution {
  SubproblemKind kind = SubproblemKind::Prox;
  QPStatus status = QPStatus::Optimal;
  Vector x;
  double r = 0.0;
  Vector cut_duals;          // one per cut, >= 0
  double floor_dual = 0.0;   // multiplier of r >= r_floor
  double t = 0.0;            // 1 + tau = sum(cut_duals) + floor_dual (level: sum(cut_duals))
  double tau = 0.0;          // multiplier of r <= l (dsqp only)
  double gamma = 0.0;        // mu / t (1 / t for the level projection)
  double kkt_residual = 0.0;
  int iterations = 0;
};

QPSolution solve_prox_qp(const SubproblemInputs& in);
QPSolution solve_level_qp(const SubproblemInputs& in);
QPSolution solve_dsqp(const SubproblemInputs& in);

struct LowerBound {
  double value = 0.0;
  Vector point;  // a minimizer of max(model, r_floor)
};

/// Minimum of the model clipped below at r_floor, solved as an LP by a dense
/// two-phase simplex on its dual. With a finite `box_radius` the minimum is
/// taken over the box |x - box_center|_inf <= box_radius; this is still a
/// lower bound on f* when a minimizer lies in the box.
LowerBound compute_lower_bound(const Bundle& bundle, double r_floor);
LowerBound compute_lower_bound(const Bundle& bundle, double r_floor, const Vector& box_center, double box_radius);

/// Recomputes stationarity, primal and dual feasibility and complementary
/// slackness for `sol` from the raw inputs. Returns the max-norm residual.
double verify_kkt(const SubproblemInputs& in, const QPSolution& sol);

/// Scale used with KKT tolerances: 1 + max |g| + |min_i f(y_i)|.
double kkt_scale(const SubproblemInputs& in);

/// Plain-text dump of a subproblem (cuts, center, parameters) for replay.
void dump_subproblem(std::ostream& os, SubproblemKind kind, const SubproblemInputs& in);

struct LoadedSubproblem {
  SubproblemKind kind;
  Bundle bundle;
  Vector center;
  double mu;
  double level;
  double r_floor;

  SubproblemInputs inputs() const;
};

LoadedSubproblem load_subproblem(std::istream& is);

}  // namespace nsbundle
