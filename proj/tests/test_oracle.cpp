#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "nsbundle/oracle.hpp"

using namespace nsbundle;

namespace {

// Plain re-statements of the test functions, written independently of the
// piece-by-piece library code.
double reference_value(int id, const Vector& x) {
  const auto sq = [](double a) { return a * a; };
  const Eigen::Index n = x.size();
  switch (id) {
    case 1:
      return std::max({sq(x[0]) + std::pow(x[1], 4), sq(2 - x[0]) + sq(2 - x[1]), 2 * std::exp(x[1] - x[0])});
    case 2:
      return std::max({std::pow(x[0], 4) + sq(x[1]), sq(2 - x[0]) + sq(2 - x[1]), 2 * std::exp(x[1] - x[0])});
    case 3:
      return std::max({5 * x[0] + x[1], -5 * x[0] + x[1], sq(x[0]) + sq(x[1]) + 4 * x[1]});
    case 4: {
      const double q = sq(x[0]) + sq(x[1]);
      return std::max({q, q + 10 * (-4 * x[0] - x[1] + 4), q + 10 * (-x[0] - 2 * x[1] + 6)});
    }
    case 5:
      return -x[0] - x[1] + std::max(0.0, sq(x[0]) + sq(x[1]) - 1);
    case 6:
      return -x[0] + 20 * std::max(sq(x[0]) + sq(x[1]) - 1, 0.0);
    case 7: {
      const double h = sq(x[0]) + sq(x[1]) - 1;
      return -x[0] + 2 * h + 1.75 * std::abs(h);
    }
    case 8: {
      const double f1 = sq(x[0]) + sq(x[1]) + 2 * sq(x[2]) + sq(x[3]) - 5 * x[0] - 5 * x[1] - 21 * x[2] + 7 * x[3];
      const double f2 = sq(x[0]) + sq(x[1]) + sq(x[2]) + sq(x[3]) + x[0] - x[1] + x[2] - x[3] - 8;
      const double f3 = sq(x[0]) + 2 * sq(x[1]) + sq(x[2]) + 2 * sq(x[3]) - x[0] - x[3] - 10;
      const double f4 = sq(x[0]) + sq(x[1]) + sq(x[2]) + 2 * x[0] - x[1] - x[3] - 5;
      return f1 + 10 * std::max({0.0, f2, f3, f4});
    }
    case 9: {
      const double a[10][5] = {{0, 0, 0, 0, 0}, {2, 1, 1, 1, 3}, {1, 2, 1, 1, 2}, {1, 4, 1, 2, 2}, {3, 2, 1, 0, 1},
                               {0, 2, 1, 0, 1}, {1, 1, 1, 1, 1}, {1, 0, 1, 2, 1}, {0, 0, 2, 1, 0}, {1, 1, 2, 0, 0}};
      const double b[10] = {1, 5, 10, 2, 4, 3, 1.7, 2.5, 6, 3.5};
      double best = -INFINITY;
      for (int i = 0; i < 10; ++i) {
        double s = 0;
        for (int j = 0; j < 5; ++j) s += sq(x[j] - a[i][j]);
        best = std::max(best, b[i] * s);
      }
      return best;
    }
    case 10: {
      double best = -INFINITY;
      for (int k = 1; k <= 5; ++k) {
        double s = 0;
        for (int i = 1; i <= 10; ++i) {
          double rowsum = 0, off = 0;
          for (int j = 1; j <= 10; ++j) {
            if (j == i) continue;
            const int lo = std::min(i, j), hi = std::max(i, j);
            const double aij = std::exp(double(lo) / hi) * std::cos(lo * hi) * std::sin(k);
            off += std::abs(aij);
            rowsum += aij * x[j - 1];
          }
          rowsum += (i / 10.0 * std::abs(std::sin(k)) + off) * x[i - 1];
          s += x[i - 1] * rowsum - std::exp(double(i) / k) * std::sin(i * k) * x[i - 1];
        }
        best = std::max(best, s);
      }
      return best;
    }
    case 11:
      return x.cwiseAbs2().maxCoeff();
    case 12:
      return x.cwiseAbs().maxCoeff();
    case 13:
      return n * x.maxCoeff() - x.sum();
    case 14:
    case 15: {
      double mx = 0, sum = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double u = 0;
        for (Eigen::Index j = 0; j < n; ++j) u += x[j] / double(i + j + 1);
        mx = std::max(mx, std::abs(u));
        sum += std::abs(u);
      }
      return id == 14 ? mx : sum;
    }
  }
  return NAN;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("registry matches the published problem table") {
  struct Row {
    const char* name;
    int n;
    double fstar;
  };
  const Row table[15] = {{"CB2", 2, 1.952224},     {"CB3", 2, 2.0},       {"DEM", 2, -3.0},
                         {"QL", 2, 7.2},           {"LQ", 2, -1.4142136}, {"Mifflin1", 2, -1.0},
                         {"Mifflin2", 2, -1.0},    {"Rosen-Suzuki", 4, -44.0}, {"Shor", 5, 22.600162},
                         {"Maxquad", 10, -0.841408}, {"Maxq", 20, 0.0},   {"Maxl", 20, 0.0},
                         {"Goffin", 50, 0.0},      {"MxHilb", 50, 0.0},   {"L1Hilb", 50, 0.0}};
  const auto& all = list_problems();
  REQUIRE(all.size() == 15);
  for (int i = 0; i < 15; ++i) {
    const ProblemSpec& p = all[static_cast<std::size_t>(i)];
    CAPTURE(p.name);
    CHECK(p.id == i + 1);
    CHECK(p.name == table[i].name);
    CHECK(p.dimension == table[i].n);
    CHECK(p.optimal_value == doctest::Approx(table[i].fstar).epsilon(1e-7));
    CHECK(p.start_point.size() == p.dimension);
    CHECK(p.reference_minimizer.size() == p.dimension);
    const double expected_finf = p.id == 8 ? -100.0 : p.id == 9 ? 0.0 : -10.0;
    CHECK(p.f_inf_default == expected_finf);
  }
}

TEST_CASE("lookup by id and name") {
  CHECK(find_problem("10").name == "Maxquad");
  CHECK(find_problem("maxquad").id == 10);
  CHECK(find_problem("ROSEN-SUZUKI").id == 8);
  CHECK_THROWS_AS(find_problem("nope"), Error);
  CHECK_THROWS_AS(problem_by_id(0), Error);
  CHECK_THROWS_AS(problem_by_id(16), Error);
}

TEST_CASE("values at known points") {
  const auto maxq0 = evaluate(find_problem("Maxq"), Vector::Zero(20));
  CHECK(maxq0.value == 0.0);
  CHECK(maxq0.subgradient.isZero());
  CHECK(evaluate(find_problem("MxHilb"), Vector::Zero(50)).value == 0.0);
  Vector dem_star(2);
  dem_star << 0.0, -3.0;
  CHECK(evaluate(find_problem("DEM"), dem_star).value == doctest::Approx(-3.0));
}

TEST_CASE("reference minimizers attain f*") {
  for (const ProblemSpec& p : list_problems()) {
    CAPTURE(p.name);
    const double f = evaluate(p, p.reference_minimizer).value;
    CHECK(std::abs(f - p.optimal_value) <= 1e-6 * (1.0 + std::abs(p.optimal_value)));
  }
}

TEST_CASE("values agree with independent formulas") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (const ProblemSpec& p : list_problems()) {
    CAPTURE(p.name);
    for (int s = 0; s < 25; ++s) {
      Vector x = p.start_point;
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += 2.0 * unit(rng);
      const double ref = reference_value(p.id, x);
      CHECK(evaluate(p, x).value == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("subgradients match central differences away from kinks") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (const ProblemSpec& p : list_problems()) {
    CAPTURE(p.name);
    for (int s = 0; s < 10; ++s) {
      Vector x = p.start_point;
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += unit(rng);
      const OracleResponse r = evaluate(p, x);
      Vector dir(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) dir[i] = unit(rng);
      const double h = 1e-6;
      const double fd = (reference_value(p.id, x + h * dir) - reference_value(p.id, x - h * dir)) / (2 * h);
      // One-sided bound always holds; equality holds unless x sits on a kink.
      const double lhs = r.subgradient.dot(dir);
      CHECK(lhs <= fd + 1e-5 * (1.0 + std::abs(fd)));
      if (std::abs(fd - lhs) > 1e-5 * (1.0 + std::abs(fd))) {
        const double fwd = (reference_value(p.id, x + h * dir) - r.value) / h;
        CHECK(lhs <= fwd + 1e-4 * (1.0 + std::abs(fwd)));
      }
    }
  }
}

TEST_CASE("evaluate rejects bad input") {
  const ProblemSpec& p = find_problem("CB2");
  CHECK_THROWS_AS(evaluate(p, Vector::Zero(3)), Error);
  Vector bad(2);
  bad << 1.0, NAN;
  CHECK_THROWS_AS(evaluate(p, bad), Error);
}

TEST_CASE("registry json") {
  const std::string js = problems_json();
  CHECK(js.find("\"Maxquad\"") != std::string::npos);
  CHECK(js.find("\"fstar\"") != std::string::npos);
}

}
