#pragma once

// Exhaustive reference solver for tiny epigraph QPs and LPs, used to check the
// active-set and simplex code. Every subset of at most dim constraints is
// tried as the active set; the best feasible equality-constrained minimizer
// is the optimum because the problems are convex.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nsbundle/model.hpp"

namespace brute {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Problem {
  // min 1/2 z'Hz + q'z  s.t.  A z <= b
  MatrixXd H;
  VectorXd q;
  MatrixXd A;
  VectorXd b;
};

struct Solution {
  VectorXd z;
  double value = std::numeric_limits<double>::infinity();
};

inline std::optional<Solution> solve(const Problem& p, double feas_tol = 1e-9) {
  const Eigen::Index dim = p.q.size();
  const Eigen::Index m = p.A.rows();
  std::optional<Solution> best;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> S;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask & (1u << i)) S.push_back(i);
    if (static_cast<Eigen::Index>(S.size()) > dim) continue;
    MatrixXd AS(S.size(), dim);
    VectorXd bS(S.size());
    for (std::size_t k = 0; k < S.size(); ++k) {
      AS.row(static_cast<Eigen::Index>(k)) = p.A.row(S[k]);
      bS[static_cast<Eigen::Index>(k)] = p.b[S[k]];
    }
    VectorXd z0 = VectorXd::Zero(dim);
    MatrixXd Z = MatrixXd::Identity(dim, dim);
    if (!S.empty()) {
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(AS);
      if (cod.rank() < static_cast<Eigen::Index>(S.size())) continue;
      z0 = cod.solve(bS);
      Eigen::FullPivLU<MatrixXd> lu(AS);
      Z = lu.kernel();
      if (Z.cols() == 1 && Z.norm() == 0.0) Z = MatrixXd(dim, 0);
    }
    VectorXd z = z0;
    if (Z.cols() > 0) {
      const MatrixXd Hr = Z.transpose() * p.H * Z;
      const VectorXd gr = Z.transpose() * (p.H * z0 + p.q);
      // Flat directions are allowed only if the objective is constant
      // along them; the pseudo-inverse then picks one minimizer.
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(Hr);
      const VectorXd lam = es.eigenvalues();
      const VectorXd gq = es.eigenvectors().transpose() * gr;
      const double cut = 1e-12 * (1.0 + lam.cwiseAbs().maxCoeff());
      bool unbounded = false;
      VectorXd w = VectorXd::Zero(lam.size());
      for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] > cut) w[i] = -gq[i] / lam[i];
        else if (std::abs(gq[i]) > 1e-12 * (1.0 + gr.norm())) unbounded = true;
      }
      if (unbounded) continue;
      z = z0 + Z * (es.eigenvectors() * w);
    }
    if (((p.A * z - p.b).array() > feas_tol * (1.0 + p.b.cwiseAbs().maxCoeff())).any()) continue;
    const double value = 0.5 * z.dot(p.H * z) + p.q.dot(z);
    if (!best || value < best->value) best = Solution{z, value};
  }
  return best;
}

// Variables (x, r). Rows: cut_i(x) <= r; then r >= floor; then r <= level.
inline Problem epigraph(const nsbundle::Bundle& bundle, const VectorXd& center, double mu, double level,
                        double floor) {
  const Eigen::Index n = center.size();
  Problem p;
  p.H = MatrixXd::Zero(n + 1, n + 1);
  p.H.topLeftCorner(n, n) = mu * MatrixXd::Identity(n, n);
  p.q = VectorXd::Zero(n + 1);
  p.q.head(n) = -mu * center;
  p.q[n] = 1.0;
  const bool has_floor = std::isfinite(floor), has_level = std::isfinite(level);
  const Eigen::Index m = static_cast<Eigen::Index>(bundle.size()) + has_floor + has_level;
  p.A = MatrixXd::Zero(m, n + 1);
  p.b = VectorXd::Zero(m);
  Eigen::Index row = 0;
  for (const auto& c : bundle) {
    p.A.row(row).head(n) = c.subgradient.transpose();
    p.A(row, n) = -1.0;
    p.b[row++] = c.subgradient.dot(c.point) - c.value;
  }
  if (has_floor) {
    p.A(row, n) = -1.0;
    p.b[row++] = -floor;
  }
  if (has_level) {
    p.A(row, n) = 1.0;
    p.b[row++] = level;
  }
  return p;
}

// Variables x only: projection of center onto {cut_i(x) <= level}.
inline Problem projection(const nsbundle::Bundle& bundle, const VectorXd& center, double level) {
  const Eigen::Index n = center.size();
  Problem p;
  p.H = MatrixXd::Identity(n, n);
  p.q = -center;
  p.A = MatrixXd(bundle.size(), n);
  p.b = VectorXd(bundle.size());
  Eigen::Index row = 0;
  for (const auto& c : bundle) {
    p.A.row(row) = c.subgradient.transpose();
    p.b[row++] = level - c.value + c.subgradient.dot(c.point);
  }
  return p;
}

}  // namespace brute
