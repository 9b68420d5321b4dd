#pragma once

#include "augwm/core_types.hpp"
#include "augwm/rng.hpp"

#include <string_view>

namespace augwm {

/// Dynamics augmentation operators T_z.
enum class AugKind {
  None,
  /// (z . s, a, r, z . s')
  RAD,
  /// (s, a, r, z . s')
  RANS,
  /// (s, a, r, s + z . (s' - s))
  DAS,
};

std::string_view to_string(AugKind k);
/// "none", "rad", "rans", "das" (case-insensitive).
AugKind parse_aug_kind(std::string_view name);

/// Support [lo, hi] of the per-component uniform augmentation distribution.
struct AugRange {
  double lo = 0.5;
  double hi = 1.5;

  void validate() const;
};

/// Each component independently Uniform[lo, hi].
ContextVector sample_z(const AugRange& range, std::size_t s_dim, Rng& rng);

/// Applies T_z. Action, reward and done are never touched. Components with
/// z_i == 1 keep their original value bit-for-bit.
Transition apply(AugKind kind, const ContextVector& z, const Transition& t);

}  // namespace augwm
