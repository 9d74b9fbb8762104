#include "raga/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace raga {
namespace {

double evaluate(const ScalarComputation& f) {
  ad::Tape tape;
  const ad::Var out = f(tape);
  const Matrix& v = out.value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw CheckInvalid("finite_difference_check: computation is " + shape_string(v) +
                       ", expected a scalar");
  }
  return v(0, 0);
}

}  // namespace

GradCheckReport finite_difference_check(const ScalarComputation& f, Parameter& param, double step,
                                        double tolerance, double abs_floor) {
  const double base = evaluate(f);
  if (const double again = evaluate(f); again != base) {
    throw CheckInvalid("finite_difference_check: computation is not deterministic");
  }

  Matrix analytic;
  {
    ad::Tape tape;
    const ad::Var out = f(tape);
    tape.backward(out);
    analytic = param.gradient;
  }

  GradCheckReport report;
  auto values = param.value.values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double saved = values[k];
    values[k] = saved + step;
    const double up = evaluate(f);
    values[k] = saved - step;
    const double down = evaluate(f);
    values[k] = saved;

    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic.data()[k];
    const double abs_err = std::fabs(a - numeric);
    ++report.entries;
    report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
    if (abs_err <= abs_floor) continue;
    const double rel = abs_err / std::max(std::fabs(a), std::fabs(numeric));
    report.max_relative_error = std::max(report.max_relative_error, rel);
    if (rel >= tolerance) ++report.failures;
  }
  report.passed = report.failures == 0;
  return report;
}

}  // namespace raga
