#include "augwm/toy_envs.hpp"

#include "augwm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace augwm {
namespace {

constexpr double kResetHalfWidth = 0.1;
constexpr double kActionPenalty = 0.01;
constexpr double kControllerGain = 0.8;

// Number of position coordinates; the state is (positions, velocities).
std::size_t position_dim(EnvKind kind) { return state_dim(kind) / 2; }

Vec observe(const DynamicsParams& params, const Vec& physical) {
  if (params.dim_scale.size() == 0) return physical;
  return physical.cwiseProduct(params.dim_scale);
}

}  // namespace

std::size_t state_dim(EnvKind kind) {
  switch (kind) {
    case EnvKind::MassSpringDamper: return 2;
    case EnvKind::PointMass2D: return 4;
    case EnvKind::DampedPendulum: return 2;
  }
  throw ValidationError("unknown environment kind");
}

std::size_t action_dim(EnvKind kind) {
  switch (kind) {
    case EnvKind::MassSpringDamper: return 1;
    case EnvKind::PointMass2D: return 2;
    case EnvKind::DampedPendulum: return 1;
  }
  throw ValidationError("unknown environment kind");
}

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::MassSpringDamper: return "msd";
    case EnvKind::PointMass2D: return "pointmass";
    case EnvKind::DampedPendulum: return "pendulum";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "msd" || name == "MassSpringDamper") return EnvKind::MassSpringDamper;
  if (name == "pointmass" || name == "PointMass2D") return EnvKind::PointMass2D;
  if (name == "pendulum" || name == "DampedPendulum") return EnvKind::DampedPendulum;
  throw ValidationError("unknown environment kind '" + std::string(name) + "'");
}

PhysicsConstants physics_constants(EnvKind kind) {
  PhysicsConstants c;
  switch (kind) {
    case EnvKind::MassSpringDamper:
      c.stiffness = 0.5;
      break;
    case EnvKind::PointMass2D:
      c.damping = 0.5;
      break;
    case EnvKind::DampedPendulum:
      c.gravity = 2.0;
      break;
  }
  return c;
}

Vec goal_position(EnvKind kind) {
  switch (kind) {
    case EnvKind::MassSpringDamper: return Vec::Constant(1, 1.0);
    case EnvKind::PointMass2D: return Vec::Constant(2, 1.0);
    // Holding torque g0 * sin(0.5) stays below the actuator limit.
    case EnvKind::DampedPendulum: return Vec::Constant(1, 0.5);
  }
  throw ValidationError("unknown environment kind");
}

void DynamicsParams::validate(EnvKind kind) const {
  if (!(mass_scale > 0.0) || !std::isfinite(mass_scale)) throw ValidationError("mass_scale must be positive");
  if (!(damping_scale > 0.0) || !std::isfinite(damping_scale))
    throw ValidationError("damping_scale must be positive");
  if (!actuator_mask.empty() && actuator_mask.size() != action_dim(kind))
    throw ValidationError("actuator_mask length must equal the action dimension");
  if (dim_scale.size() != 0) {
    if (static_cast<std::size_t>(dim_scale.size()) != state_dim(kind))
      throw ValidationError("dim_scale length must equal the state dimension");
    if (!dim_scale.allFinite() || (dim_scale.array() <= 0.0).any())
      throw ValidationError("dim_scale components must be positive");
  }
}

EnvState reset(EnvKind kind, const DynamicsParams& params, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(state_dim(kind));
  EnvState s;
  s.physical.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.physical[i] = rng.uniform(-kResetHalfWidth, kResetHalfWidth);
  s.observation = observe(params, s.physical);
  return s;
}

StepResult step(EnvKind kind, const DynamicsParams& params, const EnvState& s, const Vec& action,
                std::size_t horizon) {
  const auto a_dim = static_cast<Eigen::Index>(action_dim(kind));
  if (action.size() != a_dim) throw ValidationError("action has wrong dimension");
  for (Eigen::Index i = 0; i < a_dim; ++i) {
    if (!(action[i] >= -1.0 && action[i] <= 1.0)) throw ValidationError("action outside [-1, 1]");
  }
  if (s.step_count >= horizon) throw ValidationError("step after episode end");

  const PhysicsConstants c = physics_constants(kind);
  const auto p = static_cast<Eigen::Index>(position_dim(kind));
  const Vec& phys = s.physical.size() != 0 ? s.physical : s.observation;

  Vec masked = action;
  for (Eigen::Index i = 0; i < a_dim; ++i) {
    if (!params.actuator_mask.empty() && !params.actuator_mask[static_cast<std::size_t>(i)]) masked[i] = 0.0;
  }

  StepResult out;
  out.next.physical.resize(phys.size());
  for (Eigen::Index i = 0; i < p; ++i) {
    const double x = phys[i];
    const double v = phys[p + i];
    const double accel = c.force * masked[i] / (c.mass * params.mass_scale) -
                         c.damping * params.damping_scale * v - c.stiffness * x -
                         c.gravity * std::sin(x);
    const double v_next = v + c.dt * accel;
    out.next.physical[i] = x + c.dt * v_next;
    out.next.physical[p + i] = v_next;
  }
  out.next.observation = observe(params, out.next.physical);
  out.next.step_count = s.step_count + 1;

  const Vec err = out.next.physical.head(p) - goal_position(kind);
  out.reward = -err.squaredNorm() - kActionPenalty * action.squaredNorm();
  out.done = out.next.step_count >= horizon;
  return out;
}

Vec scripted_controller(EnvKind kind, const EnvState& s) {
  const auto p = static_cast<Eigen::Index>(position_dim(kind));
  const Vec& phys = s.physical.size() != 0 ? s.physical : s.observation;
  Vec a = (kControllerGain * (goal_position(kind) - phys.head(p))).cwiseMax(-1.0).cwiseMin(1.0);
  return a;
}

Dataset generate_offline_dataset(EnvKind kind, const DynamicsParams& params, PolicyMix mix,
                                 std::size_t n_transitions, Rng& rng, std::size_t horizon) {
  params.validate(kind);
  if (!(mix.random_frac >= 0.0) || !(mix.mediocre_frac >= 0.0) ||
      std::abs(mix.random_frac + mix.mediocre_frac - 1.0) > 1e-9)
    throw ValidationError("policy fractions must be non-negative and sum to 1");
  if (n_transitions == 0) throw ValidationError("n_transitions must be positive");
  if (horizon == 0) throw ValidationError("horizon must be positive");

  const auto a_dim = static_cast<Eigen::Index>(action_dim(kind));
  Dataset d(state_dim(kind), action_dim(kind));
  d.reserve(n_transitions);

  EnvState s = reset(kind, params, rng);
  while (d.size() < n_transitions) {
    Vec a(a_dim);
    if (rng.uniform() < mix.random_frac) {
      for (Eigen::Index i = 0; i < a_dim; ++i) a[i] = rng.uniform(-1.0, 1.0);
    } else {
      a = scripted_controller(kind, s);
    }
    StepResult r = step(kind, params, s, a, horizon);
    d.add(Transition{s.observation, a, r.reward, r.next.observation, r.done});
    s = r.done ? reset(kind, params, rng) : std::move(r.next);
  }
  return d;
}

ToyEnvironment::ToyEnvironment(EnvKind kind, DynamicsParams params, std::size_t horizon)
    : kind_(kind), params_(std::move(params)), horizon_(horizon) {
  params_.validate(kind_);
  if (horizon_ == 0) throw ValidationError("horizon must be positive");
}

}  // namespace augwm
