#pragma once

#include <augwm/errors.hpp>
#include <augwm/sac.hpp>
#include <augwm/toy_envs.hpp>
#include <augwm/world_model.hpp>

#include <cmath>
#include <utility>

namespace augwm::testing {

// True delta is scale ⊙ (ensemble mean delta); reward is the model's mean reward.
class ScaledModelEnvironment final : public Environment {
 public:
  ScaledModelEnvironment(const EnsembleModel& model, Vec scale, std::size_t horizon = kDefaultHorizon)
      : model_(model), scale_(std::move(scale)), horizon_(horizon) {
    if (static_cast<std::size_t>(scale_.size()) != model_.s_dim())
      throw ValidationError("scale has wrong dimension");
  }

  std::size_t state_dim() const override { return model_.s_dim(); }
  std::size_t action_dim() const override { return model_.a_dim(); }
  std::size_t horizon() const override { return horizon_; }

  EnvState reset(Rng& rng) const override {
    EnvState s;
    s.physical.resize(static_cast<Eigen::Index>(model_.s_dim()));
    for (Eigen::Index i = 0; i < s.physical.size(); ++i) s.physical[i] = rng.uniform(-0.1, 0.1);
    s.observation = s.physical;
    return s;
  }

  StepResult step(const EnvState& s, const Vec& action) const override {
    const ModelPrediction p = predict_mean(model_, s.observation, action);
    StepResult out;
    out.next.observation = s.observation + scale_.cwiseProduct(p.delta_mean);
    out.next.physical = out.next.observation;
    out.next.step_count = s.step_count + 1;
    out.reward = p.reward_mean;
    out.done = out.next.step_count >= horizon_;
    return out;
  }

 private:
  const EnsembleModel& model_;
  Vec scale_;
  std::size_t horizon_;
};

// Ensemble whose every member predicts the spring-damper delta exactly (zero
// reward, minimum std). Inputs are left unwhitened.
inline EnsembleModel exact_msd_model(const DynamicsParams& params = {}, std::size_t members = 2) {
  const PhysicsConstants c = physics_constants(EnvKind::MassSpringDamper);
  const double dt = c.dt;
  // delta_v = dt * (ka a - kv v - kx x); delta_x = dt * (v + delta_v)
  const double ka = c.force / (c.mass * params.mass_scale);
  const double kv = c.damping * params.damping_scale;
  const double kx = c.stiffness;
  Mlp net = Mlp::zeros({3, 6}, Activation::Tanh);
  DenseLayer& l = net.layers().back();
  l.weight.row(0) << -dt * dt * kx, dt - dt * dt * kv, dt * dt * ka;
  l.weight.row(1) << -dt * kx, -dt * kv, dt * ka;
  l.bias.tail(3).setConstant(-1e4);
  NormStats norm{Vec::Zero(3), Vec::Ones(3)};
  return EnsembleModel(std::vector<Mlp>(members, net), norm, 2, 1);
}

// Ignores its inputs: every deterministic action equals `action`.
inline Actor constant_actor(std::size_t s_dim, std::size_t ctx_dim, const Vec& action) {
  const auto a_dim = static_cast<std::size_t>(action.size());
  Mlp net = Mlp::zeros({s_dim + ctx_dim, 2 * a_dim}, Activation::Tanh);
  auto& out = net.layers().back();
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    out.bias[i] = std::atanh(action[i]);
    out.bias[i + action.size()] = -3.0;
  }
  return Actor(std::move(net), s_dim, a_dim, ctx_dim);
}

}  // namespace augwm::testing
