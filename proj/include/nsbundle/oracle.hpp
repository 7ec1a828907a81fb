#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsbundle/model.hpp"

namespace nsbundle {

struct OracleResponse {
  double value = 0.0;
  Vector subgradient;
};

/// A first-order oracle: f(y) and one element of the subdifferential at y.
using Oracle = std::function<OracleResponse(const Vector&)>;

struct ProblemSpec {
  int id = 0;
  std::string name;
  int dimension = 0;
  double optimal_value = 0.0;  // f* as tabulated (rounded to 6 decimals)
  Vector start_point;
  double f_inf_default = -10.0;
  /// A minimizer used by the complexity-bound monitor. For CB2, Shor and
  /// Maxquad it is a numerically computed point cached here; the others
  /// are closed form.
  Vector reference_minimizer;
};

/// The 15 classical unconstrained nonsmooth test problems, ids 1..15.
const std::vector<ProblemSpec>& list_problems();

/// Lookup by id ("7") or case-insensitive name ("maxquad").
const ProblemSpec& find_problem(const std::string& key);
const ProblemSpec& problem_by_id(int id);

/// Exact value and a subgradient. At kinks the gradient of the lowest-index
/// active piece is returned.
OracleResponse evaluate(const ProblemSpec& problem, const Vector& x);

Oracle make_oracle(const ProblemSpec& problem);

/// Registry as a JSON array of objects (id, name, n, fstar, f_inf, x0).
std::string problems_json();

}  // namespace nsbundle
