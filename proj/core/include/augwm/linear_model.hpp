#pragma once

#include "augwm/core_types.hpp"

namespace augwm {

/// delta = W s + c, fitted by ridge least squares (bias unpenalised).
struct LinearDynModel {
  Mat weight;
  Vec bias;
  double ridge = 0.0;
  bool fitted = false;

  /// Throws ValidationError when unfitted.
  Vec predict(const Vec& s) const;
  Mat predict(const Mat& states) const;
};

/// Exact minimiser of sum_j ||delta_j - W s_j - c||^2 + ridge ||W||_F^2 over
/// columns of `states`/`deltas`. Fewer than two columns yields an unfitted
/// model.
LinearDynModel fit_linear(const Mat& states, const Mat& deltas, double ridge);

/// 1 - SS_res / SS_tot averaged over output dimensions with non-zero
/// variance. Throws ValidationError for an unfitted model or < 2 columns.
double r_squared(const LinearDynModel& m, const Mat& states, const Mat& deltas);

}  // namespace augwm
