#pragma once

// Cutting-plane model of a convex function and the momentum sequence that
// drives the accelerated stability-center updates.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nsbundle/error.hpp"

namespace nsbundle {

using Vector = Eigen::VectorXd;

/// One linearization f(y) + <g, x - y> of the objective taken at `point`.
struct Cut {
  Vector point;
  double value = 0.0;
  Vector subgradient;

  Cut() = default;
  Cut(Vector y, double f, Vector g);

  Eigen::Index dimension() const { return point.size(); }
};

double cut_value(const Cut& cut, const Vector& x);

/// Ordered collection of cuts. The model is the pointwise max of the cuts.
class Bundle {
 public:
  explicit Bundle(Eigen::Index dimension, std::optional<std::size_t> max_size = std::nullopt);

  /// Appends a cut. Returns false when an identical (point, subgradient) pair
  /// is already present; the bundle is then left unchanged. When a max size is
  /// configured the oldest cut is evicted first.
  bool add(Cut cut);

  Eigen::Index dimension() const { return dimension_; }
  std::size_t size() const { return cuts_.size(); }
  bool empty() const { return cuts_.empty(); }
  const Cut& operator[](std::size_t i) const { return cuts_[i]; }
  const std::vector<Cut>& cuts() const { return cuts_; }

  auto begin() const { return cuts_.begin(); }
  auto end() const { return cuts_.end(); }

  /// Smallest function value stored in the bundle.
  double best_value() const;
  /// Largest |g_j| over all cuts and components.
  double max_subgradient_entry() const;

 private:
  Eigen::Index dimension_;
  std::optional<std::size_t> max_size_;
  std::vector<Cut> cuts_;
};

struct ModelValue {
  double value;
  std::size_t active_index;  // lowest index attaining the max
};

ModelValue model_eval(const Bundle& bundle, const Vector& x);

enum class BetaMode { Zero, Guler };

/// Nesterov sequence lambda_{k+1} = (1 + sqrt(1 + 4 lambda_k^2)) / 2 with the
/// derived momentum coefficients alpha_k = (lambda_k - 1) / lambda_{k+1} and
/// beta_k = lambda_k / lambda_{k+1} (Guler) or 0.
struct NesterovState {
  long k = 0;
  double lambda_k = 1.0;
  double lambda_next = 0.0;
  double alpha_k = 0.0;
  double beta_k = 0.0;
  BetaMode beta_mode = BetaMode::Zero;

  static NesterovState initial(BetaMode mode = BetaMode::Zero);
};

NesterovState nesterov_advance(const NesterovState& state);

/// Relative tolerance applied to negative linearization errors.
inline constexpr double kLinearizationTolerance = 1e-9;

/// f(y) - model(y), with negatives inside -1e-9 (1 + |f|) clamped to zero.
/// Throws LowerModelViolated for anything more negative.
double linearization_error(double f_at_y, double model_at_y);

}  // namespace nsbundle
