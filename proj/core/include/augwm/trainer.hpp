#pragma once

#include "augwm/augmentations.hpp"
#include "augwm/core_types.hpp"
#include "augwm/replay_buffer.hpp"
#include "augwm/rng.hpp"
#include "augwm/sac.hpp"
#include "augwm/world_model.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace augwm {

struct TrainConfig {
  /// Model rollout horizon.
  std::size_t h = 5;
  double lambda = 1.0;
  /// Parallel model rollouts started per epoch.
  std::size_t rollout_batch = 256;
  std::size_t epochs = 100;
  /// Share of each SAC batch drawn from the offline data.
  double real_data_frac = 0.05;
  AugKind aug = AugKind::None;
  AugRange aug_range;
  bool use_context = false;
  /// SAC gradient steps per epoch.
  std::size_t grad_steps = 10;
  std::size_t batch = 256;
  std::size_t buffer_capacity = 200'000;
  PenaltyKind penalty = PenaltyKind::MaxAleatoric;
  SacConfig sac;
  EnsembleTrainConfig model;
  std::size_t jobs = 1;

  /// Throws ValidationError on any invariant violation.
  void validate() const;
};

struct RolloutStats {
  std::size_t added = 0;
  /// Mean over rollouts of the summed penalized reward.
  double mean_return = 0.0;
  /// Rollout branches cut short by a non-finite model output.
  std::size_t nonfinite = 0;
};

/// Samples cfg.rollout_batch start states from `d_env`, rolls each for cfg.h
/// steps through randomly chosen ensemble members with stochastic actions
/// (all-ones context when cfg.use_context) and appends every transition, with
/// penalized reward, in rollout-index order.
RolloutStats rollout_batch(const EnsembleModel& model, const Actor& actor, const Dataset& d_env,
                           const TrainConfig& cfg, ReplayBuffer& buf, Rng& rng);

/// Builds one SAC batch: round(real_data_frac * batch) tuples from `d_env`,
/// the rest from `buf`, each augmented with a fresh z ~ U[lo, hi]^S. The
/// sampled z becomes the tuple's context when cfg.use_context.
SacBatch sample_training_batch(const Dataset& d_env, const ReplayBuffer& buf, const TrainConfig& cfg, Rng& rng);

struct EpochMetrics {
  std::size_t epoch = 0;  ///< 1-based
  double mean_model_return = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  std::size_t buffer_size = 0;
  std::size_t nonfinite = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolicyTrainResult {
  Actor actor;
  Critics critics;
  std::vector<EpochMetrics> metrics;
};

struct TrainResult {
  EnsembleModel model;
  Actor actor;
  Critics critics;
  std::vector<EpochMetrics> metrics;
};

/// Called after every epoch with the metrics and current learner.
using EpochCallback = std::function<void(const EpochMetrics&, const Actor&, const Critics&)>;

/// Policy optimisation inside a trained model (epoch loop only).
/// Throws TrainingDiverged when losses or parameters become non-finite.
PolicyTrainResult train_policy(const EnsembleModel& model, const Dataset& d_env, const TrainConfig& cfg, Rng& rng,
                               const EpochCallback& on_epoch = {});

/// Trains the ensemble on `d_env`, then runs `train_policy`.
TrainResult train(const Dataset& d_env, const TrainConfig& cfg, Rng& rng, const EpochCallback& on_epoch = {});

}  // namespace augwm
