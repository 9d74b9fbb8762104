#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include "raga/autodiff.hpp"

namespace raga {

/// The computation handed to finite_difference_check is not usable as an
/// oracle target (non-scalar, or not deterministic).
class CheckInvalid : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct GradCheckReport {
  std::size_t entries = 0;
  std::size_t failures = 0;
  /// Largest |analytic - numeric| / max(|analytic|, |numeric|) over entries
  /// whose absolute difference exceeds the floor.
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  bool passed = true;
};

/// Builds the scalar computation on a fresh tape. Must be deterministic.
using ScalarComputation = std::function<ad::Var(ad::Tape&)>;

/// Compares the analytic gradient of `f` with respect to `param` against
/// central differences. An entry passes when its absolute error is within
/// `abs_floor` or its relative error is below `tolerance`.
GradCheckReport finite_difference_check(const ScalarComputation& f, Parameter& param,
                                        double step = 1e-5, double tolerance = 1e-4,
                                        double abs_floor = 1e-8);

}  // namespace raga
