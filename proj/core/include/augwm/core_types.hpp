#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace augwm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One (s, a, r, s', done) record.
struct Transition {
  Vec state;
  Vec action;
  double reward = 0.0;
  Vec next_state;
  bool done = false;

  friend bool operator==(const Transition& a, const Transition& b);
};

/// Ordered collection of transitions with fixed state/action widths.
///
/// `add` validates every record, so a Dataset is always internally
/// consistent: matching dimensions and finite components.
class Dataset {
 public:
  Dataset(std::size_t s_dim, std::size_t a_dim);

  void add(Transition t);
  void reserve(std::size_t n) { transitions_.reserve(n); }

  std::size_t s_dim() const { return s_dim_; }
  std::size_t a_dim() const { return a_dim_; }
  std::size_t size() const { return transitions_.size(); }
  bool empty() const { return transitions_.empty(); }
  const Transition& operator[](std::size_t i) const { return transitions_[i]; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::size_t s_dim_;
  std::size_t a_dim_;
  std::vector<Transition> transitions_;
};

/// Throws ValidationError naming `index` when `t` does not fit (s_dim, a_dim)
/// or holds a non-finite component.
void validate_transition(const Transition& t, std::size_t s_dim, std::size_t a_dim,
                         std::size_t index);

/// Per-component whitening statistics over concatenated (state, action).
struct NormStats {
  static constexpr double kStdFloor = 1e-8;

  Vec mean;
  Vec std;

  Vec whiten(const Vec& x) const { return (x - mean).cwiseQuotient(std); }
  /// Whitens each column of `x`.
  Mat whiten(const Mat& x) const;
};

/// Population mean/std over (state, action) inputs, std floored at 1e-8.
NormStats compute_norm_stats(const Dataset& d);

/// Per-dimension context z, strictly positive and finite.
class ContextVector {
 public:
  explicit ContextVector(Vec z);
  static ContextVector ones(std::size_t dim) { return ContextVector(Vec::Ones(static_cast<Eigen::Index>(dim))); }

  const Vec& values() const { return z_; }
  std::size_t size() const { return static_cast<std::size_t>(z_.size()); }
  double operator[](std::size_t i) const { return z_[static_cast<Eigen::Index>(i)]; }

 private:
  Vec z_;
};

}  // namespace augwm
