#pragma once

#include "augwm/core_types.hpp"
#include "augwm/rng.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace augwm {

enum class EnvKind { MassSpringDamper, PointMass2D, DampedPendulum };

std::size_t state_dim(EnvKind kind);
std::size_t action_dim(EnvKind kind);
std::string_view to_string(EnvKind kind);
/// Accepts "msd", "pointmass", "pendulum" and the full enumerator names.
EnvKind parse_env_kind(std::string_view name);

inline constexpr std::size_t kDefaultHorizon = 200;

/// Shared physical constants. Each environment integrates
///   v' = v + dt * (F * (a . mask) / (m0 * mass_scale) - c0 * damping_scale * v - k0 * x - g0 * sin(x))
///   x' = x + dt * v'
/// with the spring and gravity terms present only where the kind has them.
struct PhysicsConstants {
  double dt = 0.05;
  double force = 1.0;
  double mass = 1.0;
  double damping = 0.1;
  double stiffness = 0.0;
  double gravity = 0.0;
};

PhysicsConstants physics_constants(EnvKind kind);
/// Goal position per position coordinate.
Vec goal_position(EnvKind kind);

/// Variant descriptor for a test environment. Empty mask/scale mean the
/// defaults (all actuators on, unit observation scale).
struct DynamicsParams {
  double mass_scale = 1.0;
  double damping_scale = 1.0;
  std::vector<bool> actuator_mask;
  Vec dim_scale;

  void validate(EnvKind kind) const;
};

struct EnvState {
  Vec observation;
  std::size_t step_count = 0;
  /// Unscaled simulator state; equals `observation` when dim_scale is all ones.
  Vec physical;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool done = false;
};

/// Initial physical state uniform on [-0.1, 0.1]^S_DIM.
EnvState reset(EnvKind kind, const DynamicsParams& params, Rng& rng);

/// One semi-implicit Euler step. Reward is -||pos - goal||^2 - 0.01 ||a||^2
/// evaluated on the physical state; done is set when the horizon is reached.
/// Throws ValidationError on actions outside [-1, 1] or stepping past the horizon.
StepResult step(EnvKind kind, const DynamicsParams& params, const EnvState& s, const Vec& action,
                std::size_t horizon = kDefaultHorizon);

/// Proportional controller (gain 0.8 toward the goal) used as the "medium"
/// behaviour policy.
Vec scripted_controller(EnvKind kind, const EnvState& s);

struct PolicyMix {
  double random_frac = 0.5;
  double mediocre_frac = 0.5;
};

/// Collects exactly `n_transitions` transitions. Each step independently uses
/// a uniform random action with probability random_frac and the scripted
/// controller otherwise; episodes restart after `horizon` steps.
Dataset generate_offline_dataset(EnvKind kind, const DynamicsParams& params, PolicyMix mix,
                                 std::size_t n_transitions, Rng& rng,
                                 std::size_t horizon = kDefaultHorizon);

/// Stateless environment interface used by evaluation rollouts.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::size_t horizon() const = 0;
  virtual EnvState reset(Rng& rng) const = 0;
  virtual StepResult step(const EnvState& s, const Vec& action) const = 0;
};

class ToyEnvironment final : public Environment {
 public:
  ToyEnvironment(EnvKind kind, DynamicsParams params, std::size_t horizon = kDefaultHorizon);

  std::size_t state_dim() const override { return augwm::state_dim(kind_); }
  std::size_t action_dim() const override { return augwm::action_dim(kind_); }
  std::size_t horizon() const override { return horizon_; }
  EnvState reset(Rng& rng) const override { return augwm::reset(kind_, params_, rng); }
  StepResult step(const EnvState& s, const Vec& action) const override {
    return augwm::step(kind_, params_, s, action, horizon_);
  }

  EnvKind kind() const { return kind_; }
  const DynamicsParams& params() const { return params_; }

 private:
  EnvKind kind_;
  DynamicsParams params_;
  std::size_t horizon_;
};

}  // namespace augwm
