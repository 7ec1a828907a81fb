#include "nsbundle/oracle.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace nsbundle {

namespace {

/// Running max over smooth pieces; strict comparison keeps the lowest index.
class PieceMax {
 public:
  explicit PieceMax(Eigen::Index n) : grad_(Vector::Zero(n)) {}

  template <class GradFn>
  void offer(double value, GradFn&& grad) {
    if (!has_ || value > value_) {
      has_ = true;
      value_ = value;
      grad_ = grad();
    }
  }

  OracleResponse result() const { return {value_, grad_}; }

 private:
  bool has_ = false;
  double value_ = 0.0;
  Vector grad_;
};

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

OracleResponse cb2(const Vector& x) {
  PieceMax m(2);
  const double x1 = x[0], x2 = x[1];
  m.offer(x1 * x1 + std::pow(x2, 4), [&] { return vec({2 * x1, 4 * std::pow(x2, 3)}); });
  m.offer((2 - x1) * (2 - x1) + (2 - x2) * (2 - x2), [&] { return vec({-2 * (2 - x1), -2 * (2 - x2)}); });
  const double e = 2 * std::exp(x2 - x1);
  m.offer(e, [&] { return vec({-e, e}); });
  return m.result();
}

OracleResponse cb3(const Vector& x) {
  PieceMax m(2);
  const double x1 = x[0], x2 = x[1];
  m.offer(std::pow(x1, 4) + x2 * x2, [&] { return vec({4 * std::pow(x1, 3), 2 * x2}); });
  m.offer((2 - x1) * (2 - x1) + (2 - x2) * (2 - x2), [&] { return vec({-2 * (2 - x1), -2 * (2 - x2)}); });
  const double e = 2 * std::exp(x2 - x1);
  m.offer(e, [&] { return vec({-e, e}); });
  return m.result();
}

OracleResponse dem(const Vector& x) {
  PieceMax m(2);
  const double x1 = x[0], x2 = x[1];
  m.offer(5 * x1 + x2, [] { return vec({5, 1}); });
  m.offer(-5 * x1 + x2, [] { return vec({-5, 1}); });
  m.offer(x1 * x1 + x2 * x2 + 4 * x2, [&] { return vec({2 * x1, 2 * x2 + 4}); });
  return m.result();
}

OracleResponse ql(const Vector& x) {
  PieceMax m(2);
  const double x1 = x[0], x2 = x[1];
  const double q = x1 * x1 + x2 * x2;
  m.offer(q, [&] { return vec({2 * x1, 2 * x2}); });
  m.offer(q + 10 * (-4 * x1 - x2 + 4), [&] { return vec({2 * x1 - 40, 2 * x2 - 10}); });
  m.offer(q + 10 * (-x1 - 2 * x2 + 6), [&] { return vec({2 * x1 - 10, 2 * x2 - 20}); });
  return m.result();
}

OracleResponse lq(const Vector& x) {
  PieceMax m(2);
  const double x1 = x[0], x2 = x[1];
  m.offer(-x1 - x2, [] { return vec({-1, -1}); });
  m.offer(-x1 - x2 + (x1 * x1 + x2 * x2 - 1), [&] { return vec({2 * x1 - 1, 2 * x2 - 1}); });
  return m.result();
}

OracleResponse mifflin1(const Vector& x) {
  PieceMax m(2);
  const double x1 = x[0], x2 = x[1];
  const double h = x1 * x1 + x2 * x2 - 1;
  m.offer(-x1 + 20 * h, [&] { return vec({-1 + 40 * x1, 40 * x2}); });
  m.offer(-x1, [] { return vec({-1, 0}); });
  return m.result();
}

OracleResponse mifflin2(const Vector& x) {
  // -x1 + 2h + 1.75|h| = max(-x1 + 3.75h, -x1 + 0.25h)
  PieceMax m(2);
  const double x1 = x[0], x2 = x[1];
  const double h = x1 * x1 + x2 * x2 - 1;
  m.offer(-x1 + 3.75 * h, [&] { return vec({-1 + 7.5 * x1, 7.5 * x2}); });
  m.offer(-x1 + 0.25 * h, [&] { return vec({-1 + 0.5 * x1, 0.5 * x2}); });
  return m.result();
}

OracleResponse rosen_suzuki(const Vector& x) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  const double f1 = x1 * x1 + x2 * x2 + 2 * x3 * x3 + x4 * x4 - 5 * x1 - 5 * x2 - 21 * x3 + 7 * x4;
  const Vector g1 = vec({2 * x1 - 5, 2 * x2 - 5, 4 * x3 - 21, 2 * x4 + 7});
  const double f2 = x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4 + x1 - x2 + x3 - x4 - 8;
  const Vector g2 = vec({2 * x1 + 1, 2 * x2 - 1, 2 * x3 + 1, 2 * x4 - 1});
  const double f3 = x1 * x1 + 2 * x2 * x2 + x3 * x3 + 2 * x4 * x4 - x1 - x4 - 10;
  const Vector g3 = vec({2 * x1 - 1, 4 * x2, 2 * x3, 4 * x4 - 1});
  const double f4 = x1 * x1 + x2 * x2 + x3 * x3 + 2 * x1 - x2 - x4 - 5;
  const Vector g4 = vec({2 * x1 + 2, 2 * x2 - 1, 2 * x3, -1});
  PieceMax m(4);
  m.offer(f1, [&] { return g1; });
  m.offer(f1 + 10 * f2, [&] { return Vector(g1 + 10 * g2); });
  m.offer(f1 + 10 * f3, [&] { return Vector(g1 + 10 * g3); });
  m.offer(f1 + 10 * f4, [&] { return Vector(g1 + 10 * g4); });
  return m.result();
}

constexpr std::array<std::array<double, 5>, 10> kShorA = {{
    {0, 0, 0, 0, 0},
    {2, 1, 1, 1, 3},
    {1, 2, 1, 1, 2},
    {1, 4, 1, 2, 2},
    {3, 2, 1, 0, 1},
    {0, 2, 1, 0, 1},
    {1, 1, 1, 1, 1},
    {1, 0, 1, 2, 1},
    {0, 0, 2, 1, 0},
    {1, 1, 2, 0, 0},
}};
constexpr std::array<double, 10> kShorB = {1, 5, 10, 2, 4, 3, 1.7, 2.5, 6, 3.5};

OracleResponse shor(const Vector& x) {
  PieceMax m(5);
  for (std::size_t i = 0; i < kShorA.size(); ++i) {
    Vector diff(5);
    for (int j = 0; j < 5; ++j) diff[j] = x[j] - kShorA[i][static_cast<std::size_t>(j)];
    m.offer(kShorB[i] * diff.squaredNorm(), [&] { return Vector(2 * kShorB[i] * diff); });
  }
  return m.result();
}

struct MaxquadData {
  std::array<Eigen::MatrixXd, 5> A;
  std::array<Vector, 5> b;

  MaxquadData() {
    for (int k = 1; k <= 5; ++k) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(10, 10);
      for (int i = 1; i <= 10; ++i) {
        for (int j = i + 1; j <= 10; ++j) {
          const double v = std::exp(static_cast<double>(i) / j) * std::cos(i * j) * std::sin(k);
          a(i - 1, j - 1) = v;
          a(j - 1, i - 1) = v;
        }
      }
      for (int i = 1; i <= 10; ++i) {
        double off = 0.0;
        for (int j = 1; j <= 10; ++j)
          if (j != i) off += std::abs(a(i - 1, j - 1));
        a(i - 1, i - 1) = i / 10.0 * std::abs(std::sin(k)) + off;
      }
      Vector bk(10);
      for (int i = 1; i <= 10; ++i) bk[i - 1] = std::exp(static_cast<double>(i) / k) * std::sin(i * k);
      A[static_cast<std::size_t>(k - 1)] = a;
      b[static_cast<std::size_t>(k - 1)] = bk;
    }
  }
};

const MaxquadData& maxquad_data() {
  static const MaxquadData data;
  return data;
}

OracleResponse maxquad(const Vector& x) {
  const auto& d = maxquad_data();
  PieceMax m(10);
  for (std::size_t k = 0; k < 5; ++k) {
    const Vector ax = d.A[k] * x;
    m.offer(x.dot(ax) - d.b[k].dot(x), [&] { return Vector(2 * ax - d.b[k]); });
  }
  return m.result();
}

OracleResponse maxq(const Vector& x) {
  PieceMax m(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    m.offer(x[i] * x[i], [&] {
      Vector g = Vector::Zero(x.size());
      g[i] = 2 * x[i];
      return g;
    });
  }
  return m.result();
}

// max_i |u_i| over pieces ordered (+u_0, -u_0, +u_1, -u_1, ...), u_i = <row(i), x>.
template <class RowFn>
OracleResponse max_abs(Eigen::Index n, Eigen::Index count, RowFn&& row, const Vector& x) {
  PieceMax m(n);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Vector r = row(i);
    const double u = r.dot(x);
    m.offer(u, [&] { return r; });
    m.offer(-u, [&] { return Vector(-r); });
  }
  return m.result();
}

OracleResponse maxl(const Vector& x) {
  const Eigen::Index n = x.size();
  return max_abs(n, n, [n](Eigen::Index i) { return Vector(Vector::Unit(n, i)); }, x);
}

OracleResponse goffin(const Vector& x) {
  const Eigen::Index n = x.size();
  Eigen::Index j = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (x[i] > x[j]) j = i;
  Vector g = Vector::Constant(n, -1.0);
  g[j] += static_cast<double>(n);
  return {static_cast<double>(n) * x[j] - x.sum(), g};
}

Vector hilbert_row(Eigen::Index n, Eigen::Index i) {
  Vector r(n);
  for (Eigen::Index j = 0; j < n; ++j) r[j] = 1.0 / static_cast<double>(i + j + 1);
  return r;
}

OracleResponse mxhilb(const Vector& x) {
  const Eigen::Index n = x.size();
  return max_abs(n, n, [n](Eigen::Index i) { return hilbert_row(n, i); }, x);
}

OracleResponse l1hilb(const Vector& x) {
  const Eigen::Index n = x.size();
  OracleResponse out{0.0, Vector::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector r = hilbert_row(n, i);
    const double u = r.dot(x);
    out.value += std::abs(u);
    out.subgradient += (u >= 0 ? 1.0 : -1.0) * r;
  }
  return out;
}

using ProblemFn = OracleResponse (*)(const Vector&);

ProblemFn function_for(int id) {
  static constexpr std::array<ProblemFn, 15> table = {
      cb2, cb3, dem, ql, lq, mifflin1, mifflin2, rosen_suzuki, shor, maxquad, maxq, maxl, goffin, mxhilb, l1hilb};
  return table.at(static_cast<std::size_t>(id - 1));
}

Vector alternating_start(int n) {
  // x_i = i for the first half, -i for the second (1-based).
  Vector x(n);
  for (int i = 1; i <= n; ++i) x[i - 1] = i <= n / 2 ? i : -i;
  return x;
}

std::vector<ProblemSpec> build_registry() {
  std::vector<ProblemSpec> p;
  auto add = [&](int id, std::string name, int n, double fstar, Vector x0, double finf, Vector xstar) {
    p.push_back(ProblemSpec{id, std::move(name), n, fstar, std::move(x0), finf, std::move(xstar)});
  };
  add(1, "CB2", 2, 1.952224, vec({1.0, -0.1}), -10, vec({1.139037666329247, 0.89955992717875444}));
  add(2, "CB3", 2, 2.0, vec({2.0, 2.0}), -10, vec({1.0, 1.0}));
  add(3, "DEM", 2, -3.0, vec({1.0, 1.0}), -10, vec({0.0, -3.0}));
  add(4, "QL", 2, 7.2, vec({-1.0, 5.0}), -10, vec({1.2, 2.4}));
  add(5, "LQ", 2, -std::sqrt(2.0), vec({-0.5, -0.5}), -10, vec({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}));
  add(6, "Mifflin1", 2, -1.0, vec({0.8, 0.6}), -10, vec({1.0, 0.0}));
  add(7, "Mifflin2", 2, -1.0, vec({-1.0, -1.0}), -10, vec({1.0, 0.0}));
  add(8, "Rosen-Suzuki", 4, -44.0, Vector::Zero(4), -100, vec({0.0, 1.0, 2.0, -1.0}));
  add(9, "Shor", 5, 22.600162, vec({0.0, 0.0, 0.0, 0.0, 1.0}), 0,
      vec({1.1243512012970132, 0.97946161332000659, 1.4777082042153387, 0.92023365365239385,
           1.124291606679477}));
  add(10, "Maxquad", 10, -0.841408, Vector::Zero(10), -10,
      vec({-0.12625657966032661, -0.034378343481340216, -0.006857206593938266, 0.026360658713030446,
           0.067294945902065459, -0.27839950551757137, 0.074218623854084592, 0.13852401611533338,
           0.084031212029862121, 0.038580309396672431}));
  add(11, "Maxq", 20, 0.0, alternating_start(20), -10, Vector::Zero(20));
  add(12, "Maxl", 20, 0.0, alternating_start(20), -10, Vector::Zero(20));
  {
    Vector x0(50);
    for (int i = 1; i <= 50; ++i) x0[i - 1] = i - 25.5;
    // Minimizers are the multiples of the all-ones vector; 0 is the nearest to x0.
    add(13, "Goffin", 50, 0.0, x0, -10, Vector::Zero(50));
  }
  add(14, "MxHilb", 50, 0.0, Vector::Ones(50), -10, Vector::Zero(50));
  add(15, "L1Hilb", 50, 0.0, Vector::Ones(50), -10, Vector::Zero(50));
  return p;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

const std::vector<ProblemSpec>& list_problems() {
  static const std::vector<ProblemSpec> registry = build_registry();
  return registry;
}

const ProblemSpec& problem_by_id(int id) {
  const auto& all = list_problems();
  if (id < 1 || id > static_cast<int>(all.size()))
    throw Error(ErrorCode::InvalidArgument, "unknown problem id " + std::to_string(id));
  return all[static_cast<std::size_t>(id - 1)];
}

const ProblemSpec& find_problem(const std::string& key) {
  if (!key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isdigit(c); }))
    return problem_by_id(std::stoi(key));
  const std::string k = lower(key);
  for (const auto& p : list_problems())
    if (lower(p.name) == k) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown problem '" + key + "'");
}

OracleResponse evaluate(const ProblemSpec& problem, const Vector& x) {
  if (x.size() != problem.dimension) {
    std::ostringstream os;
    os << "evaluate(" << problem.name << "): expected dimension " << problem.dimension << ", got " << x.size();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  if (!x.allFinite()) throw Error(ErrorCode::NonFinite, "evaluate(" + problem.name + "): non-finite input");
  OracleResponse r = function_for(problem.id)(x);
  if (!std::isfinite(r.value) || !r.subgradient.allFinite())
    throw Error(ErrorCode::NonFinite, "evaluate(" + problem.name + "): non-finite output");
  return r;
}

Oracle make_oracle(const ProblemSpec& problem) {
  return [&problem](const Vector& x) { return evaluate(problem, x); };
}

std::string problems_json() {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : list_problems()) {
    arr.push_back({{"id", p.id},
                   {"name", p.name},
                   {"n", p.dimension},
                   {"fstar", p.optimal_value},
                   {"f_inf", p.f_inf_default},
                   {"x0", std::vector<double>(p.start_point.data(), p.start_point.data() + p.start_point.size())}});
  }
  return arr.dump(2);
}

}  // namespace nsbundle
