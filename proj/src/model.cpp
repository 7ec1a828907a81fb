#include "nsbundle/model.hpp"

#include <cmath>
#include <sstream>

namespace nsbundle {

namespace {

void require_same_dimension(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    std::ostringstream os;
    os << where << ": dimension mismatch (" << a << " vs " << b << ")";
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

}  // namespace

Cut::Cut(Vector y, double f, Vector g) : point(std::move(y)), value(f), subgradient(std::move(g)) {
  require_same_dimension(point.size(), subgradient.size(), "Cut");
  if (!std::isfinite(value) || !point.allFinite() || !subgradient.allFinite())
    throw Error(ErrorCode::NonFinite, "Cut: non-finite entry");
}

double cut_value(const Cut& cut, const Vector& x) {
  require_same_dimension(cut.dimension(), x.size(), "cut_value");
  return cut.value + cut.subgradient.dot(x - cut.point);
}

Bundle::Bundle(Eigen::Index dimension, std::optional<std::size_t> max_size)
    : dimension_(dimension), max_size_(max_size) {
  if (dimension <= 0) throw Error(ErrorCode::InvalidArgument, "Bundle: dimension must be positive");
  if (max_size && *max_size == 0) throw Error(ErrorCode::InvalidArgument, "Bundle: max size must be positive");
}

bool Bundle::add(Cut cut) {
  require_same_dimension(dimension_, cut.dimension(), "Bundle::add");
  require_same_dimension(dimension_, cut.subgradient.size(), "Bundle::add");
  for (const Cut& c : cuts_) {
    if (c.point == cut.point && c.subgradient == cut.subgradient) return false;
  }
  if (max_size_ && cuts_.size() >= *max_size_) cuts_.erase(cuts_.begin());
  cuts_.push_back(std::move(cut));
  return true;
}

double Bundle::best_value() const {
  if (cuts_.empty()) throw Error(ErrorCode::EmptyBundle, "Bundle::best_value: empty bundle");
  double best = cuts_.front().value;
  for (const Cut& c : cuts_) best = std::min(best, c.value);
  return best;
}

double Bundle::max_subgradient_entry() const {
  double m = 0.0;
  for (const Cut& c : cuts_) m = std::max(m, c.subgradient.lpNorm<Eigen::Infinity>());
  return m;
}

ModelValue model_eval(const Bundle& bundle, const Vector& x) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, "model_eval: empty bundle");
  ModelValue out{cut_value(bundle[0], x), 0};
  for (std::size_t i = 1; i < bundle.size(); ++i) {
    const double v = cut_value(bundle[i], x);
    if (v > out.value) out = {v, i};
  }
  return out;
}

namespace {

void fill_coefficients(NesterovState& s) {
  s.lambda_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * s.lambda_k * s.lambda_k));
  s.alpha_k = (s.lambda_k - 1.0) / s.lambda_next;
  s.beta_k = s.beta_mode == BetaMode::Guler ? s.lambda_k / s.lambda_next : 0.0;
}

}  // namespace

NesterovState NesterovState::initial(BetaMode mode) {
  NesterovState s;
  s.beta_mode = mode;
  fill_coefficients(s);
  return s;
}

NesterovState nesterov_advance(const NesterovState& state) {
  NesterovState next = state;
  next.k = state.k + 1;
  next.lambda_k = state.lambda_next;
  fill_coefficients(next);
  return next;
}

double linearization_error(double f_at_y, double model_at_y) {
  if (!std::isfinite(f_at_y) || !std::isfinite(model_at_y))
    throw Error(ErrorCode::NonFinite, "linearization_error: non-finite input");
  const double eps = f_at_y - model_at_y;
  if (eps >= 0.0) return eps;
  if (eps >= -kLinearizationTolerance * (1.0 + std::abs(f_at_y))) return 0.0;
  std::ostringstream os;
  os << "linearization error " << eps << " below tolerance: model exceeds f (f=" << f_at_y
     << ", model=" << model_at_y << ")";
  throw Error(ErrorCode::LowerModelViolated, os.str());
}

}  // namespace nsbundle
