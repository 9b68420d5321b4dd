#pragma once

#include "augwm/context_adapter.hpp"
#include "augwm/rng.hpp"
#include "augwm/sac.hpp"
#include "augwm/toy_envs.hpp"
#include "augwm/world_model.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace augwm {

/// Per-(cell, seed) returns over a mass x damping grid. Each stored value is
/// the average of rollouts_per_cell episode returns.
struct EvalGridResult {
  std::vector<double> mass;
  std::vector<double> damping;
  std::vector<std::uint64_t> seeds;
  ContextMode mode = ContextMode::Default;
  /// Row-major [mass][damping][seed].
  std::vector<double> returns;

  double at(std::size_t mi, std::size_t di, std::size_t si) const;
  double& at(std::size_t mi, std::size_t di, std::size_t si);
  double cell_mean(std::size_t mi, std::size_t di) const;
  /// Population std over seeds.
  double cell_std(std::size_t mi, std::size_t di) const;
  void validate() const;
};

struct GridEvalOptions {
  std::size_t rollouts_per_cell = 5;
  std::size_t horizon = kDefaultHorizon;
  std::size_t jobs = 1;
};

/// Rollout r of (cell, seed) uses Rng(seed).split(r), so every cell and mode
/// sees the same start states and sampling noise.
EvalGridResult grid_eval(const Actor& actor, const EnsembleModel& model, EnvKind kind,
                         const std::vector<double>& mass, const std::vector<double>& damping, ContextMode mode,
                         const std::vector<std::uint64_t>& seeds, const AdaptConfig& cfg,
                         const GridEvalOptions& opts = {});

/// Oracle-mode episode return; requires a context-conditioned actor.
double oracle_eval(const Actor& actor, const EnsembleModel& model, const Environment& env, std::size_t horizon,
                   const AdaptConfig& cfg, Rng& rng);

struct SwitchSpec {
  std::size_t t_switch = 100;
  DynamicsParams params_before;
  DynamicsParams params_after;

  void validate(EnvKind kind, std::size_t horizon) const;
};

/// Toy environment whose parameters change once step_count reaches t_switch.
class SwitchingEnvironment final : public Environment {
 public:
  SwitchingEnvironment(EnvKind kind, SwitchSpec spec, std::size_t horizon = kDefaultHorizon);

  std::size_t state_dim() const override { return augwm::state_dim(kind_); }
  std::size_t action_dim() const override { return augwm::action_dim(kind_); }
  std::size_t horizon() const override { return horizon_; }
  EnvState reset(Rng& rng) const override;
  StepResult step(const EnvState& s, const Vec& action) const override;

 private:
  EnvKind kind_;
  SwitchSpec spec_;
  std::size_t horizon_;
};

inline constexpr std::size_t kRollingWindow = 25;

struct SwitchTrace {
  AdaptResult rollout;
  /// Trailing mean of up to kRollingWindow rewards ending at each step.
  std::vector<double> rolling_reward;
  std::vector<double> cumulative_return;
};

SwitchTrace switch_eval(const Actor& actor, const EnsembleModel& model, EnvKind kind, const SwitchSpec& spec,
                        std::size_t horizon, ContextMode mode, const AdaptConfig& cfg, Rng& rng);

struct GridSummary {
  double mean = 0.0;
  /// Population std over seeds of each seed's grid mean.
  double std = 0.0;
  std::vector<double> mass_means;
  std::vector<double> damping_means;
  std::vector<double> seed_means;
};

GridSummary aggregate(const EvalGridResult& r);

}  // namespace augwm
