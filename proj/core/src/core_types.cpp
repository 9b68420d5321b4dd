#include "augwm/core_types.hpp"

#include "augwm/errors.hpp"

#include <cmath>
#include <string>

namespace augwm {

bool operator==(const Transition& a, const Transition& b) {
  return a.state == b.state && a.action == b.action && a.reward == b.reward &&
         a.next_state == b.next_state && a.done == b.done;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.s_dim_ == b.s_dim_ && a.a_dim_ == b.a_dim_ && a.transitions_ == b.transitions_;
}

void validate_transition(const Transition& t, std::size_t s_dim, std::size_t a_dim,
                         std::size_t index) {
  const auto fail = [index](const std::string& why) {
    throw ValidationError("record " + std::to_string(index) + ": " + why);
  };
  if (static_cast<std::size_t>(t.state.size()) != s_dim) fail("state has wrong dimension");
  if (static_cast<std::size_t>(t.next_state.size()) != s_dim) fail("next_state has wrong dimension");
  if (static_cast<std::size_t>(t.action.size()) != a_dim) fail("action has wrong dimension");
  if (!t.state.allFinite()) fail("non-finite state");
  if (!t.next_state.allFinite()) fail("non-finite next_state");
  if (!t.action.allFinite()) fail("non-finite action");
  if (t.action.size() > 0 && t.action.cwiseAbs().maxCoeff() > 1.0) fail("action outside [-1, 1]");
  if (!std::isfinite(t.reward)) fail("non-finite reward");
}

Dataset::Dataset(std::size_t s_dim, std::size_t a_dim) : s_dim_(s_dim), a_dim_(a_dim) {
  if (s_dim == 0 || a_dim == 0) throw ValidationError("dataset dimensions must be positive");
}

void Dataset::add(Transition t) {
  validate_transition(t, s_dim_, a_dim_, transitions_.size());
  transitions_.push_back(std::move(t));
}

Mat NormStats::whiten(const Mat& x) const {
  return (x.colwise() - mean).array().colwise() / std.array();
}

NormStats compute_norm_stats(const Dataset& d) {
  if (d.empty()) throw ValidationError("compute_norm_stats: empty dataset");
  const auto s = static_cast<Eigen::Index>(d.s_dim());
  const auto dim = s + static_cast<Eigen::Index>(d.a_dim());
  const double n = static_cast<double>(d.size());

  Vec mean = Vec::Zero(dim);
  for (const auto& t : d.transitions()) {
    mean.head(s) += t.state;
    mean.tail(dim - s) += t.action;
  }
  mean /= n;

  // Two-pass for accuracy on large offsets.
  Vec var = Vec::Zero(dim);
  for (const auto& t : d.transitions()) {
    var.head(s) += (t.state - mean.head(s)).cwiseAbs2();
    var.tail(dim - s) += (t.action - mean.tail(dim - s)).cwiseAbs2();
  }
  var /= n;

  NormStats stats;
  stats.mean = std::move(mean);
  stats.std = var.cwiseSqrt().cwiseMax(NormStats::kStdFloor);
  return stats;
}

ContextVector::ContextVector(Vec z) : z_(std::move(z)) {
  if (z_.size() == 0) throw ValidationError("context vector must be non-empty");
  for (Eigen::Index i = 0; i < z_.size(); ++i) {
    if (!std::isfinite(z_[i]) || z_[i] <= 0.0)
      throw ValidationError("context components must be finite and positive");
  }
}

}  // namespace augwm
