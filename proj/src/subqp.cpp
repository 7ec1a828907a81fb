#include "nsbundle/subqp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "simplex.hpp"

namespace nsbundle {

const char* to_string(QPStatus s) {
  switch (s) {
    case QPStatus::Optimal: return "Optimal";
    case QPStatus::Infeasible: return "Infeasible";
    case QPStatus::Degenerate: return "Degenerate";
  }
  return "?";
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

// Constraint rows in coordinates d = x - center: row j reads
// <g_j, d> + b_j <= r. Cut rows come first; the floor (if finite) is the
// last row with g = 0 and b = r_floor.
struct Rows {
  MatrixXd G;
  Vector b;
  Index cuts = 0;
  bool has_floor = false;

  Index count() const { return G.cols(); }
};

Rows build_rows(const Bundle& bundle, const Vector& center, double r_floor) {
  Rows rows;
  rows.cuts = static_cast<Index>(bundle.size());
  rows.has_floor = std::isfinite(r_floor);
  const Index p = rows.cuts + (rows.has_floor ? 1 : 0);
  rows.G = MatrixXd::Zero(bundle.dimension(), p);
  rows.b.resize(p);
  for (Index i = 0; i < rows.cuts; ++i) {
    const Cut& c = bundle[static_cast<std::size_t>(i)];
    rows.G.col(i) = c.subgradient;
    rows.b[i] = cut_value(c, center);
  }
  if (rows.has_floor) rows.b[rows.cuts] = r_floor;
  return rows;
}

void check_inputs(const SubproblemInputs& in, const char* where) {
  if (in.bundle == nullptr || in.bundle->empty())
    throw Error(ErrorCode::EmptyBundle, std::string(where) + ": empty bundle");
  if (in.center.size() != in.bundle->dimension())
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": center dimension mismatch");
  if (!in.center.allFinite()) throw Error(ErrorCode::NonFinite, std::string(where) + ": non-finite center");
  if (std::isnan(in.level) || std::isnan(in.r_floor))
    throw Error(ErrorCode::NonFinite, std::string(where) + ": NaN level or floor");
}

// Goldfarb-Idnani dual active-set method for
//
//   min 1/2 x' diag(h) x + c'x   s.t.  N_j' x >= e_j  for every column j of N.
//
// The iterates stay dual feasible (the minimizer over the current active set
// with nonnegative multipliers); each outer pass adds the most violated
// constraint, dropping active ones whose multipliers would turn negative.
// Linear dependence between the new normal and the active ones is handled by
// pure dual steps, so the active normals are always independent.
class DualActiveSet {
 public:
  DualActiveSet(const Vector& h, const Vector& c, const MatrixXd& N, const Vector& e)
      : h_(h), c_(c), N_(N), e_(e), dim_(h.size()) {
    J_ = h.cwiseSqrt().cwiseInverse().asDiagonal();
    R_ = MatrixXd::Zero(dim_, dim_);
    x_ = -c.cwiseQuotient(h);
    norms_.resize(N.cols());
    for (Index j = 0; j < N.cols(); ++j) norms_[j] = N.col(j).lpNorm<Eigen::Infinity>();
  }

  /// Starts from the minimizer over the single active constraint p, given by
  /// the caller as (x, u) to avoid passing through the unconstrained point.
  void start(Index p, const Vector& x, double u) {
    const Vector d = J_.transpose() * N_.col(p);
    add(p, d, u);
    x_ = x;
  }

  /// Returns false if the constraints are inconsistent.
  bool solve() {
    const Index m = N_.cols();
    const int limit = 20 * static_cast<int>(m + dim_) + 100;
    int refinements = 0;
    for (iterations_ = 0; iterations_ < limit; ++iterations_) {
      Index p = most_violated();
      if (p < 0 && refinements < 3) {
        ++refinements;
        refine();
        p = most_violated();
      }
      if (p < 0) return true;
      double u_new = 0.0;
      for (;;) {
        const Vector d = J_.transpose() * N_.col(p);
        const Index q = static_cast<Index>(active_.size());
        const Vector z = J_.rightCols(dim_ - q) * d.tail(dim_ - q);
        const Vector r = q > 0 ? Vector(R_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q)))
                               : Vector();

        // Partial step: the largest dual step keeping active multipliers >= 0.
        double t1 = kInf;
        Index leave = -1;
        for (Index i = 0; i < q; ++i) {
          if (r[i] <= 1e-14 * (1.0 + std::abs(d.head(q).lpNorm<Eigen::Infinity>()))) continue;
          const double ratio = u_[static_cast<std::size_t>(i)] / r[i];
          if (ratio < t1) {
            t1 = ratio;
            leave = i;
          }
        }
        // Full step: the primal step that makes constraint p active.
        const double zn = z.dot(N_.col(p));
        const bool primal = d.tail(dim_ - q).norm() > 1e-12 * d.norm();
        const double t2 = primal ? -(N_.col(p).dot(x_) - e_[p]) / zn : kInf;
        const double t = std::min(t1, t2);
        if (!std::isfinite(t)) return false;

        for (Index i = 0; i < q; ++i) u_[static_cast<std::size_t>(i)] -= t * r[i];
        u_new += t;
        if (primal) x_ += t * z;
        if (primal && t2 <= t1) {
          add(p, d, u_new);
          break;
        }
        drop(leave);
        if (++iterations_ >= limit) break;
      }
    }
    throw Error(ErrorCode::NumericalFailure, "dual active-set QP: iteration limit reached");
  }

  const Vector& x() const { return x_; }
  int iterations() const { return iterations_; }

  /// Multipliers indexed by constraint (zero for inactive ones).
  Vector multipliers() const {
    Vector u = Vector::Zero(N_.cols());
    for (std::size_t i = 0; i < active_.size(); ++i) u[active_[i]] = std::max(u_[i], 0.0);
    return u;
  }

 private:
  Index most_violated() const {
    const double xn = x_.lpNorm<Eigen::Infinity>();
    Index best = -1;
    double worst = 0.0;
    for (Index j = 0; j < N_.cols(); ++j) {
      if (is_active(j)) continue;
      const double s = N_.col(j).dot(x_) - e_[j];
      const double scale = 1.0 + std::abs(e_[j]) + norms_[j] * xn;
      const double v = s / scale;
      if (v < -1e-13 && v < worst) {
        worst = v;
        best = j;
      }
    }
    return best;
  }

  // Rebuilds J and R for the active set by a fresh QR and applies Newton
  // corrections to the equality-constrained problem. The Givens updates lose
  // accuracy when the active normals are nearly dependent.
  void refine() {
    const Index q = static_cast<Index>(active_.size());
    const Vector root = h_.cwiseSqrt();
    if (q == 0) {
      x_ = -c_.cwiseQuotient(h_);
      return;
    }
    MatrixXd M(dim_, q);
    for (Index i = 0; i < q; ++i) M.col(i) = N_.col(active_[static_cast<std::size_t>(i)]).cwiseQuotient(root);
    const Eigen::HouseholderQR<MatrixXd> qr(M);
    const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(dim_, dim_);
    J_ = root.cwiseInverse().asDiagonal() * Q;
    R_.setZero();
    R_.topLeftCorner(q, q) = qr.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
    const auto Rq = R_.topLeftCorner(q, q).triangularView<Eigen::Upper>();

    Vector u = Eigen::Map<const Vector>(u_.data(), q);
    for (int round = 0; round < 2; ++round) {
      Vector rho(q);
      Vector sigma = h_.cwiseProduct(x_) + c_;
      for (Index i = 0; i < q; ++i) {
        const Index j = active_[static_cast<std::size_t>(i)];
        rho[i] = e_[j] - N_.col(j).dot(x_);
        sigma -= u[i] * N_.col(j);
      }
      const Vector w1 = Rq.transpose().solve(rho);
      const Vector w2 = -J_.rightCols(dim_ - q).transpose() * sigma;
      const Vector du = Rq.solve(Vector(w1 + J_.leftCols(q).transpose() * sigma));
      x_ += J_.leftCols(q) * w1 + J_.rightCols(dim_ - q) * w2;
      u += du;
    }
    for (Index i = 0; i < q; ++i) u_[static_cast<std::size_t>(i)] = u[i];
  }

  bool is_active(Index j) const { return std::find(active_.begin(), active_.end(), j) != active_.end(); }

  // d = J' n_p for the constraint being added.
  void add(Index p, Vector d, double u) {
    const Index q = static_cast<Index>(active_.size());
    for (Index j = dim_ - 1; j > q; --j) {
      const double a = d[j - 1];
      const double b = d[j];
      if (b == 0.0) continue;
      const double hyp = std::hypot(a, b);
      const double cs = a / hyp;
      const double sn = b / hyp;
      d[j - 1] = hyp;
      d[j] = 0.0;
      const Vector left = J_.col(j - 1);
      J_.col(j - 1) = cs * left + sn * J_.col(j);
      J_.col(j) = -sn * left + cs * J_.col(j);
    }
    R_.col(q).head(q + 1) = d.head(q + 1);
    active_.push_back(p);
    u_.push_back(u);
  }

  void drop(Index l) {
    const Index q = static_cast<Index>(active_.size());
    for (Index k = l; k + 1 < q; ++k) R_.col(k).head(q) = R_.col(k + 1).head(q);
    R_.col(q - 1).setZero();
    for (Index j = l; j + 1 < q; ++j) {
      const double a = R_(j, j);
      const double b = R_(j + 1, j);
      if (b == 0.0) continue;
      const double hyp = std::hypot(a, b);
      const double cs = a / hyp;
      const double sn = b / hyp;
      for (Index k = j; k + 1 < q; ++k) {
        const double ra = R_(j, k);
        const double rb = R_(j + 1, k);
        R_(j, k) = cs * ra + sn * rb;
        R_(j + 1, k) = -sn * ra + cs * rb;
      }
      const Vector left = J_.col(j);
      J_.col(j) = cs * left + sn * J_.col(j + 1);
      J_.col(j + 1) = -sn * left + cs * J_.col(j + 1);
    }
    R_.row(q - 1).setZero();
    active_.erase(active_.begin() + l);
    u_.erase(u_.begin() + l);
  }

  const Vector& h_;
  const Vector& c_;
  const MatrixXd& N_;
  const Vector& e_;
  Index dim_;
  Vector norms_;
  MatrixXd J_;
  MatrixXd R_;
  Vector x_;
  std::vector<Index> active_;
  std::vector<double> u_;
  int iterations_ = 0;
};

Index argmax_row(const Rows& rows, Index usable, const Vector& d, double* value) {
  Index best = 0;
  double v = rows.G.col(0).dot(d) + rows.b[0];
  for (Index j = 1; j < usable; ++j) {
    const double vj = rows.G.col(j).dot(d) + rows.b[j];
    if (vj > v) {
      v = vj;
      best = j;
    }
  }
  if (value) *value = v;
  return best;
}

QPSolution infeasible(SubproblemKind kind, const SubproblemInputs& in) {
  QPSolution sol;
  sol.kind = kind;
  sol.status = QPStatus::Infeasible;
  sol.x = in.center;
  sol.cut_duals = Vector::Zero(static_cast<Index>(in.bundle->size()));
  sol.kkt_residual = kInf;
  return sol;
}

// Curvature given to r relative to mu. The bias it introduces is removed by
// re-centering r, so it only needs to keep the dual method well conditioned.
constexpr double kRidge = 1e-10;
constexpr int kRecenterRounds = 8;

QPSolution solve_epigraph(SubproblemKind kind, const SubproblemInputs& in) {
  if (!(in.mu > 0.0) || !std::isfinite(in.mu))
    throw Error(ErrorCode::InvalidArgument, "subproblem: mu must be positive and finite");
  const Rows rows = build_rows(*in.bundle, in.center, in.r_floor);
  const double level = kind == SubproblemKind::Prox ? kInf : in.level;
  if (rows.has_floor && in.r_floor > level) return infeasible(kind, in);

  // Variables (d, r); constraints r - <g_j, d> >= b_j, then the floor
  // r >= r_floor and the level -r >= -level when present.
  const Index n = in.center.size();
  const Index p = rows.count();
  const bool has_level = std::isfinite(level);
  MatrixXd N = MatrixXd::Zero(n + 1, p + (has_level ? 1 : 0));
  Vector e(N.cols());
  N.topLeftCorner(n, p) = -rows.G;
  N.row(n).head(p).setOnes();
  e.head(p) = rows.b;
  if (has_level) {
    N(n, p) = -1.0;
    e[p] = -level;
  }

  const double delta = kRidge * in.mu;
  Vector h = Vector::Constant(n + 1, in.mu);
  h[n] = delta;

  double r0 = 0.0;
  const Index start_row = argmax_row(rows, p, Vector::Zero(n), &r0);
  double r_center = r0;

  Vector x;
  Vector u;
  int iterations = 0;
  for (int round = 0; round < kRecenterRounds; ++round) {
    Vector c = Vector::Zero(n + 1);
    c[n] = 1.0 - delta * r_center;
    DualActiveSet qp(h, c, N, e);
    // Minimizer with only the top row active, written so that nothing of
    // size 1/delta is formed.
    const Vector g = N.col(start_row).head(n);
    const double u0 = (delta * (e[start_row] - r_center) + 1.0) / (delta * g.squaredNorm() / in.mu + 1.0);
    Vector x0(n + 1);
    x0.head(n) = g * (u0 / in.mu);
    x0[n] = e[start_row] - g.dot(x0.head(n));
    qp.start(start_row, x0, u0);
    if (!qp.solve()) return infeasible(kind, in);
    x = qp.x();
    u = qp.multipliers();
    iterations += qp.iterations();
    const double shift = x[n] - r_center;
    r_center = x[n];
    if (delta * std::abs(shift) <= 1e-15) break;
  }

  QPSolution sol;
  sol.kind = kind;
  sol.x = in.center + x.head(n);
  sol.r = x[n];
  sol.cut_duals = u.head(rows.cuts);
  sol.floor_dual = rows.has_floor ? u[rows.cuts] : 0.0;
  sol.tau = has_level ? u[p] : 0.0;
  // Stationarity in r gives sum(u) = 1 + tau; taking t from tau keeps
  // t = 1 exact whenever the level is inactive. verify_kkt checks the sum.
  sol.t = 1.0 + sol.tau;
  sol.gamma = in.mu / sol.t;
  sol.iterations = iterations;
  sol.status = sol.floor_dual > 0.0 ? QPStatus::Degenerate : QPStatus::Optimal;
  sol.kkt_residual = verify_kkt(in, sol);
  return sol;
}

}  // namespace

QPSolution solve_prox_qp(const SubproblemInputs& in) {
  check_inputs(in, "solve_prox_qp");
  return solve_epigraph(SubproblemKind::Prox, in);
}

QPSolution solve_dsqp(const SubproblemInputs& in) {
  check_inputs(in, "solve_dsqp");
  return solve_epigraph(SubproblemKind::DoublyStabilized, in);
}

QPSolution solve_level_qp(const SubproblemInputs& in) {
  check_inputs(in, "solve_level_qp");
  if (!std::isfinite(in.level)) throw Error(ErrorCode::InvalidArgument, "solve_level_qp: level must be finite");
  const Rows rows = build_rows(*in.bundle, in.center, in.r_floor);
  if (rows.has_floor && in.r_floor > in.level) return infeasible(SubproblemKind::Level, in);

  // Projection of the center onto {<g_j, d> + b_j <= level}. The floor row
  // is a constant here and takes no part.
  const Index n = in.center.size();
  const MatrixXd N = -rows.G.leftCols(rows.cuts);
  const Vector e = (rows.b.head(rows.cuts).array() - in.level).matrix();
  const Vector h = Vector::Ones(n);
  const Vector c = Vector::Zero(n);
  DualActiveSet qp(h, c, N, e);
  if (!qp.solve()) return infeasible(SubproblemKind::Level, in);

  QPSolution sol;
  sol.kind = SubproblemKind::Level;
  sol.x = in.center + qp.x();
  argmax_row(rows, rows.cuts, qp.x(), &sol.r);
  sol.cut_duals = qp.multipliers();
  sol.t = sol.cut_duals.sum();
  sol.tau = 0.0;
  sol.gamma = sol.t > 0.0 ? 1.0 / sol.t : kInf;
  sol.iterations = qp.iterations();
  sol.status = sol.t > 0.0 ? QPStatus::Optimal : QPStatus::Degenerate;
  sol.kkt_residual = verify_kkt(in, sol);
  return sol;
}

LowerBound compute_lower_bound(const Bundle& bundle, double r_floor) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, "compute_lower_bound: empty bundle");
  // Shift to the best point in the bundle to keep the row values small.
  std::size_t ref = 0;
  for (std::size_t i = 1; i < bundle.size(); ++i)
    if (bundle[i].value < bundle[ref].value) ref = i;
  return compute_lower_bound(bundle, r_floor, bundle[ref].point, kInf);
}

LowerBound compute_lower_bound(const Bundle& bundle, double r_floor, const Vector& box_center, double box_radius) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, "compute_lower_bound: empty bundle");
  if (!std::isfinite(r_floor)) throw Error(ErrorCode::InvalidArgument, "compute_lower_bound: r_floor must be finite");
  if (box_center.size() != bundle.dimension())
    throw Error(ErrorCode::DimensionMismatch, "compute_lower_bound: box center dimension mismatch");
  const Rows rows = build_rows(bundle, box_center, r_floor);
  const auto lp = detail::solve_epigraph_lp(rows.G, rows.b, box_radius);
  return LowerBound{std::max(lp.value, r_floor), box_center + lp.d};
}

double kkt_scale(const SubproblemInputs& in) {
  return 1.0 + in.bundle->max_subgradient_entry() + std::abs(in.bundle->best_value());
}

double verify_kkt(const SubproblemInputs& in, const QPSolution& sol) {
  const Bundle& bundle = *in.bundle;
  double res = 0.0;
  auto note = [&res](double v) { res = std::max(res, std::abs(v)); };
  const bool level_form = sol.kind == SubproblemKind::Level;
  const double mu = level_form ? 1.0 : in.mu;

  // Multiplier-weighted terms are measured in convex-weight form, i.e.
  // divided by the aggregate t when t > 1. Otherwise a collapsed mu (t huge)
  // would inflate residuals that are only rounding in the weights.
  const double weight = std::max(1.0, sol.cut_duals.sum() + (level_form ? 0.0 : sol.floor_dual));
  Vector stationarity = mu * (sol.x - in.center);
  double dual_sum = 0.0;
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    const double lam = sol.cut_duals[static_cast<Index>(i)];
    stationarity += lam * bundle[i].subgradient;
    dual_sum += lam;
    note(std::min(lam, 0.0) / weight);
    const double slack = cut_value(bundle[i], sol.x) - (level_form ? in.level : sol.r);
    note(std::max(slack, 0.0));
    note(lam * slack / weight);
  }
  note(stationarity.lpNorm<Eigen::Infinity>() / weight);

  if (level_form) {
    if (std::isfinite(in.r_floor)) note(std::max(in.r_floor - in.level, 0.0));
    return res;
  }

  note(std::min(sol.floor_dual, 0.0) / weight);
  note(std::min(sol.tau, 0.0) / weight);
  if (std::isfinite(in.r_floor)) {
    const double slack = in.r_floor - sol.r;
    note(std::max(slack, 0.0));
    note(sol.floor_dual * slack / weight);
  } else {
    note(sol.floor_dual / weight);
  }
  const double level = sol.kind == SubproblemKind::Prox ? kInf : in.level;
  if (std::isfinite(level)) {
    const double slack = sol.r - level;
    note(std::max(slack, 0.0));
    note(sol.tau * slack / weight);
  } else {
    note(sol.tau / weight);
  }
  note((1.0 - dual_sum - sol.floor_dual + sol.tau) / weight);
  return res;
}

namespace {

const char* kind_name(SubproblemKind k) {
  switch (k) {
    case SubproblemKind::Prox: return "prox";
    case SubproblemKind::Level: return "level";
    case SubproblemKind::DoublyStabilized: return "dsqp";
  }
  return "?";
}

void write_vector(std::ostream& os, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) os << ' ' << v[i];
}

double parse_real(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw Error(ErrorCode::Io, "load_subproblem: bad number '" + tok + "'");
  return v;
}

std::string expect_token(std::istream& is, const char* what) {
  std::string tok;
  if (!(is >> tok)) throw Error(ErrorCode::Io, std::string("load_subproblem: missing ") + what);
  return tok;
}

Vector read_vector(std::istream& is, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = parse_real(expect_token(is, "vector entry"));
  return v;
}

void expect_keyword(std::istream& is, const std::string& kw) {
  const std::string tok = expect_token(is, kw.c_str());
  if (tok != kw) throw Error(ErrorCode::Io, "load_subproblem: expected '" + kw + "', got '" + tok + "'");
}

}  // namespace

void dump_subproblem(std::ostream& os, SubproblemKind kind, const SubproblemInputs& in) {
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  const Bundle& b = *in.bundle;
  os << "nsbundle-subproblem 1\n";
  os << "kind " << kind_name(kind) << '\n';
  os << "n " << b.dimension() << " m " << b.size() << '\n';
  os << "mu " << in.mu << '\n';
  os << "level " << in.level << '\n';
  os << "r_floor " << in.r_floor << '\n';
  os << "center";
  write_vector(os, in.center);
  os << '\n';
  for (const Cut& c : b) {
    os << "cut " << c.value << " point";
    write_vector(os, c.point);
    os << " subgradient";
    write_vector(os, c.subgradient);
    os << '\n';
  }
  os.precision(old_precision);
}

SubproblemInputs LoadedSubproblem::inputs() const {
  SubproblemInputs in;
  in.bundle = &bundle;
  in.center = center;
  in.mu = mu;
  in.level = level;
  in.r_floor = r_floor;
  return in;
}

LoadedSubproblem load_subproblem(std::istream& is) {
  expect_keyword(is, "nsbundle-subproblem");
  if (expect_token(is, "version") != "1") throw Error(ErrorCode::Io, "load_subproblem: unsupported version");
  expect_keyword(is, "kind");
  const std::string kind = expect_token(is, "kind");
  SubproblemKind k;
  if (kind == "prox") {
    k = SubproblemKind::Prox;
  } else if (kind == "level") {
    k = SubproblemKind::Level;
  } else if (kind == "dsqp") {
    k = SubproblemKind::DoublyStabilized;
  } else {
    throw Error(ErrorCode::Io, "load_subproblem: unknown kind '" + kind + "'");
  }
  expect_keyword(is, "n");
  const Index n = static_cast<Index>(parse_real(expect_token(is, "n")));
  expect_keyword(is, "m");
  const auto m = static_cast<std::size_t>(parse_real(expect_token(is, "m")));
  expect_keyword(is, "mu");
  const double mu = parse_real(expect_token(is, "mu"));
  expect_keyword(is, "level");
  const double level = parse_real(expect_token(is, "level"));
  expect_keyword(is, "r_floor");
  const double r_floor = parse_real(expect_token(is, "r_floor"));
  expect_keyword(is, "center");
  Vector center = read_vector(is, n);
  Bundle bundle(n);
  for (std::size_t i = 0; i < m; ++i) {
    expect_keyword(is, "cut");
    const double f = parse_real(expect_token(is, "cut value"));
    expect_keyword(is, "point");
    Vector y = read_vector(is, n);
    expect_keyword(is, "subgradient");
    Vector g = read_vector(is, n);
    bundle.add(Cut(std::move(y), f, std::move(g)));
  }
  return LoadedSubproblem{k, std::move(bundle), std::move(center), mu, level, r_floor};
}

}  // namespace nsbundle
