#pragma once

#include <span>

namespace augwm {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  /// Two-sided.
  double p = 1.0;
};

/// Unequal-variance two-sample t-test. Throws ValidationError when either
/// sample has fewer than two values, holds non-finite values, or both
/// sample variances are zero (unless the means coincide, which gives t = 0, p = 1).
WelchResult welch_ttest(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

}  // namespace augwm
