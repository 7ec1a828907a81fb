#pragma once

#include <stdexcept>
#include <string>

namespace nsbundle {

enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch = 2,
  EmptyBundle = 3,
  NonFinite = 4,
  Infeasible = 5,
  NumericalFailure = 6,
  LowerModelViolated = 7,
  Io = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nsbundle
