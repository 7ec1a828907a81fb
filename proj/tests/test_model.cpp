#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "nsbundle/model.hpp"

using namespace nsbundle;

namespace {

Vector v(std::initializer_list<double> xs) {
  Vector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("cut_value") {
  CHECK(cut_value(Cut(v({0, 0}), 0.0, v({1, 0})), v({0, 0})) == 0.0);
  const Cut flat(v({1, 1}), 3.0, v({0, 0}));
  CHECK(cut_value(flat, v({-7, 12})) == 3.0);
  CHECK(cut_value(flat, v({0.5, 0.25})) == 3.0);
  CHECK(cut_value(Cut(v({0, 0}), 0.0, v({1, 0})), v({2, 5})) == doctest::Approx(2.0));
  CHECK_THROWS_AS(cut_value(flat, v({1, 2, 3})), Error);
}

TEST_CASE("cut rejects bad input") {
  CHECK_THROWS_AS(Cut(v({0, 0}), 0.0, v({1})), Error);
  CHECK_THROWS_AS(Cut(v({0, NAN}), 0.0, v({1, 0})), Error);
  CHECK_THROWS_AS(Cut(v({0, 0}), INFINITY, v({1, 0})), Error);
}

TEST_CASE("model_eval") {
  Bundle one(2);
  one.add(Cut(v({0, 0}), 1.5, v({2, -1})));
  const auto single = model_eval(one, v({1, 1}));
  CHECK(single.value == doctest::Approx(2.5));
  CHECK(single.active_index == 0);

  // |x| from its cuts at +1 and -1.
  Bundle absx(1);
  absx.add(Cut(v({1}), 1.0, v({1})));
  absx.add(Cut(v({-1}), 1.0, v({-1})));
  const auto at0 = model_eval(absx, v({0}));
  CHECK(at0.value == doctest::Approx(0.0));
  CHECK(at0.active_index == 0);
  const auto at_m3 = model_eval(absx, v({-3}));
  CHECK(at_m3.value == doctest::Approx(3.0));
  CHECK(at_m3.active_index == 1);

  CHECK_THROWS_AS(model_eval(Bundle(1), v({0})), Error);
  CHECK_THROWS_AS(model_eval(absx, v({0, 0})), Error);
}

TEST_CASE("bundle insert policy") {
  Bundle b(2);
  CHECK(b.add(Cut(v({0, 0}), 1.0, v({1, 0}))));
  CHECK_FALSE(b.add(Cut(v({0, 0}), 1.0, v({1, 0}))));
  CHECK(b.add(Cut(v({0, 0}), 1.0, v({0, 1}))));
  CHECK(b.size() == 2);
  CHECK_THROWS_AS(b.add(Cut(v({0}), 1.0, v({1}))), Error);

  Bundle capped(1, 2);
  capped.add(Cut(v({1}), 1.0, v({1})));
  capped.add(Cut(v({2}), 2.0, v({1})));
  capped.add(Cut(v({3}), 3.0, v({1})));
  REQUIRE(capped.size() == 2);
  CHECK(capped[0].point[0] == 2.0);
  CHECK(capped.best_value() == 2.0);
}

TEST_CASE("model is permutation invariant and monotone in cuts") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Cut> cuts;
    for (int i = 0; i < 6; ++i) {
      Vector y(3), g(3);
      for (int j = 0; j < 3; ++j) {
        y[j] = gauss(rng);
        g[j] = gauss(rng);
      }
      cuts.emplace_back(y, gauss(rng), g);
    }
    Bundle forward(3), backward(3), partial(3);
    for (const Cut& c : cuts) forward.add(c);
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) backward.add(*it);
    for (int i = 0; i < 3; ++i) partial.add(cuts[static_cast<std::size_t>(i)]);
    for (int s = 0; s < 10; ++s) {
      Vector x(3);
      for (int j = 0; j < 3; ++j) x[j] = 3.0 * gauss(rng);
      const double value = model_eval(forward, x).value;
      CHECK(model_eval(backward, x).value == value);
      CHECK(model_eval(partial, x).value <= value);
      double direct = -INFINITY;
      for (const Cut& c : cuts) direct = std::max(direct, c.value + c.subgradient.dot(x - c.point));
      CHECK(value == doctest::Approx(direct).epsilon(1e-14));
    }
  }
}

TEST_CASE("nesterov_advance first step") {
  const NesterovState s0 = NesterovState::initial();
  CHECK(s0.k == 0);
  CHECK(s0.lambda_k == 1.0);
  CHECK(s0.lambda_next == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
  CHECK(s0.alpha_k == 0.0);
  CHECK(s0.beta_k == 0.0);

  const NesterovState g0 = NesterovState::initial(BetaMode::Guler);
  CHECK(g0.beta_k == doctest::Approx(2.0 / (1.0 + std::sqrt(5.0))).epsilon(1e-15));

  const NesterovState s1 = nesterov_advance(s0);
  CHECK(s1.k == 1);
  CHECK(s1.lambda_k == s0.lambda_next);
  // lambda_2 = (1 + sqrt(1 + 4 phi^2)) / 2 = 2.1935270..., alpha_1 = (phi - 1) / lambda_2
  CHECK(s1.lambda_next == doctest::Approx(2.1935270).epsilon(1e-7));
  CHECK(s1.alpha_k == doctest::Approx(0.2817535).epsilon(1e-6));
  CHECK(s1.beta_k == 0.0);
}

TEST_CASE("nesterov identities hold to k = 1000") {
  for (BetaMode mode : {BetaMode::Zero, BetaMode::Guler}) {
    NesterovState s = NesterovState::initial(mode);
    double prev = s.lambda_k;
    double sum = s.lambda_k;
    for (int k = 1; k <= 1000; ++k) {
      s = nesterov_advance(s);
      const double l = s.lambda_k;
      sum += l;
      CHECK(std::abs(prev * prev - (l * l - l)) <= 1e-9 * l * l);
      CHECK(std::abs(l * l - sum) <= 1e-9 * sum);
      CHECK(l >= (k + 2) / 2.0);
      CHECK(s.alpha_k == doctest::Approx((l - 1.0) / s.lambda_next).epsilon(1e-15));
      if (mode == BetaMode::Guler) CHECK(s.beta_k == doctest::Approx(l / s.lambda_next).epsilon(1e-15));
      prev = l;
    }
  }
}

TEST_CASE("linearization_error") {
  CHECK(linearization_error(2.0, 2.0) == 0.0);
  CHECK(linearization_error(2.0, 1.5) == 0.5);
  CHECK(linearization_error(2.0, 2.0 + 1e-12) == 0.0);
  CHECK_THROWS_AS(linearization_error(2.0, 2.0 + 1e-6), Error);
  try {
    linearization_error(0.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LowerModelViolated);
  }
  CHECK_THROWS_AS(linearization_error(NAN, 1.0), Error);
}

}
