#include "augwm/augmentations.hpp"

#include "augwm/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace augwm {

std::string_view to_string(AugKind k) {
  switch (k) {
    case AugKind::None: return "none";
    case AugKind::RAD: return "rad";
    case AugKind::RANS: return "rans";
    case AugKind::DAS: return "das";
  }
  return "unknown";
}

AugKind parse_aug_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "none") return AugKind::None;
  if (lower == "rad") return AugKind::RAD;
  if (lower == "rans") return AugKind::RANS;
  if (lower == "das") return AugKind::DAS;
  throw ValidationError("unknown augmentation '" + std::string(name) + "'");
}

void AugRange::validate() const {
  if (!(lo > 0.0) || !(lo <= hi) || !std::isfinite(hi))
    throw ValidationError("augmentation range must satisfy 0 < lo <= hi");
}

ContextVector sample_z(const AugRange& range, std::size_t s_dim, Rng& rng) {
  range.validate();
  Vec z(static_cast<Eigen::Index>(s_dim));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.uniform(range.lo, range.hi);
  return ContextVector(std::move(z));
}

Transition apply(AugKind kind, const ContextVector& z, const Transition& t) {
  const Vec& zv = z.values();
  if (zv.size() != t.state.size() || zv.size() != t.next_state.size())
    throw ValidationError("augmentation vector length must equal the state dimension");

  Transition out = t;
  for (Eigen::Index i = 0; i < zv.size(); ++i) {
    const double zi = zv[i];
    if (zi == 1.0) continue;
    switch (kind) {
      case AugKind::None:
        break;
      case AugKind::RAD:
        out.state[i] = zi * t.state[i];
        out.next_state[i] = zi * t.next_state[i];
        break;
      case AugKind::RANS:
        out.next_state[i] = zi * t.next_state[i];
        break;
      case AugKind::DAS:
        out.next_state[i] = t.state[i] + zi * (t.next_state[i] - t.state[i]);
        break;
    }
  }
  return out;
}

}  // namespace augwm
