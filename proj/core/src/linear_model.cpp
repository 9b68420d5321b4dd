#include "augwm/linear_model.hpp"

#include "augwm/errors.hpp"

namespace augwm {

Vec LinearDynModel::predict(const Vec& s) const {
  if (!fitted) throw ValidationError("linear model is not fitted");
  return weight * s + bias;
}

Mat LinearDynModel::predict(const Mat& states) const {
  if (!fitted) throw ValidationError("linear model is not fitted");
  return (weight * states).colwise() + bias;
}

LinearDynModel fit_linear(const Mat& states, const Mat& deltas, double ridge) {
  if (!(ridge >= 0.0)) throw ValidationError("ridge coefficient must be non-negative");
  if (states.cols() != deltas.cols()) throw ValidationError("fit_linear: state/delta count mismatch");
  LinearDynModel m;
  m.ridge = ridge;
  const Eigen::Index n = states.cols();
  const Eigen::Index d = states.rows();
  if (n < 2) return m;

  // Normal equations on the augmented design [s; 1].
  Mat x(d + 1, n);
  x.topRows(d) = states;
  x.row(d).setOnes();
  Mat gram = x * x.transpose();
  gram.topLeftCorner(d, d).diagonal().array() += ridge;
  const Mat rhs = x * deltas.transpose();
  const Mat theta = gram.completeOrthogonalDecomposition().solve(rhs);  // (d + 1) x out

  m.weight = theta.topRows(d).transpose();
  m.bias = theta.row(d).transpose();
  m.fitted = m.weight.allFinite() && m.bias.allFinite();
  return m;
}

double r_squared(const LinearDynModel& m, const Mat& states, const Mat& deltas) {
  if (!m.fitted) throw ValidationError("r_squared: linear model is not fitted");
  if (states.cols() < 2 || states.cols() != deltas.cols()) throw ValidationError("r_squared: need >= 2 pairs");
  const Mat pred = m.predict(states);
  double total = 0.0;
  int dims = 0;
  bool residual_free = true;
  for (Eigen::Index i = 0; i < deltas.rows(); ++i) {
    const double mean = deltas.row(i).mean();
    const double ss_tot = (deltas.row(i).array() - mean).square().sum();
    const double ss_res = (deltas.row(i) - pred.row(i)).squaredNorm();
    if (ss_res != 0.0) residual_free = false;
    if (ss_tot == 0.0) continue;
    total += 1.0 - ss_res / ss_tot;
    ++dims;
  }
  if (dims == 0) return residual_free ? 1.0 : 0.0;
  return total / dims;
}

}  // namespace augwm
