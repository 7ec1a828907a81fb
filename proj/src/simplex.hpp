#pragma once

#include <limits>

#include <Eigen/Dense>

namespace nsbundle::detail {

struct EpigraphLpResult {
  bool bounded = true;
  double value = 0.0;
  Eigen::VectorXd d;  // minimizer in shifted coordinates
  int pivots = 0;
};

/// min r over (d, r) s.t. <g_j, d> + b_j <= r for every column j of G and,
/// when box_radius is finite, |d_i| <= box_radius.
///
/// Solved through its dual  max b'v s.t. G v = 0, 1'v = 1, v >= 0  with a
/// dense two-phase tableau simplex (Dantzig pricing, Bland's rule after a run
/// of degenerate pivots). The primal point is recovered from the final basis
/// against the original data. `bounded` is false when 0 is not in the convex
/// hull of the columns of G (never with a box).
EpigraphLpResult solve_epigraph_lp(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                                   double box_radius = std::numeric_limits<double>::infinity());

}  // namespace nsbundle::detail
