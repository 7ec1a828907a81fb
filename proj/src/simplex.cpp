#include "simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "nsbundle/error.hpp"

namespace nsbundle::detail {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kBlandAfterDegenerate = 30;

class Tableau {
 public:
  // Equality rows A v = rhs with v >= 0, plus one artificial per row.
  Tableau(const MatrixXd& A, const VectorXd& rhs, double pivot_tol)
      : rows_(A.rows()), structural_(A.cols()), tol_(pivot_tol) {
    T_ = MatrixXd::Zero(rows_, structural_ + rows_);
    T_.leftCols(structural_) = A;
    T_.rightCols(rows_).setIdentity();
    rhs_ = rhs;
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Index i = 0; i < rows_; ++i) basis_[static_cast<std::size_t>(i)] = structural_ + i;
  }

  Index rows() const { return rows_; }
  Index structural() const { return structural_; }
  const std::vector<Index>& basis() const { return basis_; }
  int pivots() const { return pivots_; }

  /// Installs cost vector `c` (over all columns) and prices out the basis.
  void set_costs(const VectorXd& c) {
    reduced_ = c;
    value_ = 0.0;
    // Per column: far-away cuts carry huge costs that must not loosen the
    // test for the ones near the optimum.
    cost_tol_ = 0.1 * tol_ * (1.0 + c.array().abs());
    for (Index i = 0; i < rows_; ++i) {
      const double cb = c[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) {
        reduced_ -= cb * T_.row(i).transpose();
        value_ += cb * rhs_[i];
      }
    }
  }

  double value() const { return value_; }

  /// Maximizes the installed costs over columns [0, allowed). Returns false
  /// if the objective is unbounded.
  bool maximize(Index allowed) {
    int degenerate_run = 0;
    const int max_pivots = 50 * static_cast<int>(rows_ + T_.cols()) + 1000;
    for (int it = 0; it < max_pivots; ++it) {
      const bool bland = degenerate_run >= kBlandAfterDegenerate;
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j) {
        if (reduced_[j] <= cost_tol_[j]) continue;
        if (enter < 0 || (!bland && reduced_[j] > reduced_[enter])) enter = j;
        if (bland) break;
      }
      if (enter < 0) return true;

      Index leave = -1;
      double best = 0.0;
      for (Index i = 0; i < rows_; ++i) {
        const double a = T_(i, enter);
        if (a <= tol_) continue;
        const double ratio = std::max(rhs_[i], 0.0) / a;
        const double tie = 1e-12 * (1.0 + best);
        if (leave < 0 || ratio < best - tie) {
          leave = i;
          best = ratio;
        } else if (ratio <= best + tie &&
                   basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = i;
          best = std::min(best, ratio);
        }
      }
      if (leave < 0) return false;
      degenerate_run = best <= tol_ ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
    throw Error(ErrorCode::NumericalFailure, "simplex: pivot limit reached (cycling?)");
  }

  void pivot_in(Index r, Index c) { pivot(r, c); }

  /// Pivots every artificial variable out of the basis where a structural
  /// column allows it. Rows where none does are redundant and stay inert.
  void expel_artificials() {
    for (Index i = 0; i < rows_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < structural_) continue;
      Index col = -1;
      for (Index j = 0; j < structural_; ++j) {
        if (std::abs(T_(i, j)) > tol_ && (col < 0 || std::abs(T_(i, j)) > std::abs(T_(i, col)))) col = j;
      }
      if (col >= 0) pivot(i, col);
    }
  }

 private:
  void pivot(Index r, Index c) {
    ++pivots_;
    const double p = T_(r, c);
    T_.row(r) /= p;
    rhs_[r] /= p;
    for (Index i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = T_(i, c);
      if (f == 0.0) continue;
      T_.row(i) -= f * T_.row(r);
      rhs_[i] -= f * rhs_[r];
      if (std::abs(rhs_[i]) < tol_) rhs_[i] = 0.0;
    }
    if (reduced_.size() > 0) {
      const double f = reduced_[c];
      if (f != 0.0) {
        reduced_ -= f * T_.row(r).transpose();
        value_ += f * rhs_[r];
      }
      reduced_[c] = 0.0;
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  Index rows_;
  Index structural_;
  double tol_;
  VectorXd cost_tol_;
  MatrixXd T_;
  VectorXd rhs_;
  VectorXd reduced_;
  double value_ = 0.0;
  std::vector<Index> basis_;
  int pivots_ = 0;
};

}  // namespace

EpigraphLpResult solve_epigraph_lp(const MatrixXd& G, const VectorXd& b, double box_radius) {
  const Index n = G.rows();
  const Index p = G.cols();
  if (p == 0 || b.size() != p) throw Error(ErrorCode::InvalidArgument, "solve_epigraph_lp: bad dimensions");
  if (!(box_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "solve_epigraph_lp: box radius must be positive");

  // Dual columns: one per cut, then (with a box) a pair -e_i, +e_i per
  // coordinate with cost -R, so that the dual objective is b'v - R |Gv|_1.
  const bool boxed = std::isfinite(box_radius);
  const Index cols = p + (boxed ? 2 * n : 0);
  MatrixXd A = MatrixXd::Zero(n + 1, cols);
  A.topLeftCorner(n, p) = G;
  A.row(n).head(p).setOnes();
  VectorXd cost(cols);
  cost.head(p) = b;
  if (boxed) {
    A.block(0, p, n, n) = -MatrixXd::Identity(n, n);
    A.block(0, p + n, n, n) = MatrixXd::Identity(n, n);
    cost.tail(2 * n).setConstant(-box_radius);
  }
  VectorXd rhs = VectorXd::Zero(n + 1);
  rhs[n] = 1.0;

  const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
  Tableau tab(A, rhs, 1e-11 * scale);
  const Index total = cols + tab.rows();

  // A zero column (the floor) is feasible on its own: v = e_j. Starting
  // from it leaves only degenerate artificials for phase 1 to clear.
  Index zero_col = -1;
  for (Index j = 0; j < p; ++j) {
    if (G.col(j).isZero(0.0) && (zero_col < 0 || b[j] > b[zero_col])) zero_col = j;
  }
  if (zero_col >= 0) tab.pivot_in(n, zero_col);

  // Phase 1: maximize -sum(artificials).
  VectorXd c1 = VectorXd::Zero(total);
  c1.tail(tab.rows()).setConstant(-1.0);
  tab.set_costs(c1);
  tab.maximize(cols);
  EpigraphLpResult out;
  if (tab.value() < -1e-9) {
    out.bounded = false;
    out.value = -std::numeric_limits<double>::infinity();
    out.pivots = tab.pivots();
    return out;
  }
  tab.expel_artificials();

  // Phase 2: maximize b'v.
  VectorXd c2 = VectorXd::Zero(total);
  c2.head(cols) = cost;
  tab.set_costs(c2);
  if (!tab.maximize(cols)) throw Error(ErrorCode::NumericalFailure, "simplex: dual LP unbounded");

  // Recover the primal point from the final basis using the original data:
  // B' y = c_B, with d = -y[0:n], r = y[n].
  const Index R = tab.rows();
  MatrixXd B = MatrixXd::Zero(R, R);
  VectorXd cB(R);
  for (Index i = 0; i < R; ++i) {
    const Index j = tab.basis()[static_cast<std::size_t>(i)];
    if (j < cols) {
      B.col(i) = A.col(j);
      cB[i] = cost[j];
    } else {
      B(j - cols, i) = 1.0;
      cB[i] = 0.0;
    }
  }
  const VectorXd y = B.transpose().fullPivLu().solve(cB);
  out.d = -y.head(n);
  out.value = y[n];
  out.pivots = tab.pivots();
  return out;
}

}  // namespace nsbundle::detail
