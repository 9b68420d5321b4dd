#pragma once

#include "augwm/core_types.hpp"
#include "augwm/linear_model.hpp"
#include "augwm/rng.hpp"
#include "augwm/sac.hpp"
#include "augwm/toy_envs.hpp"
#include "augwm/world_model.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace augwm {

enum class ContextMode {
  /// All-ones context for the whole episode (also the only mode for ctx_dim = 0).
  Default,
  /// Self-supervised estimate from the online linear model.
  Learned,
  /// Privileged ratio of observed to predicted deltas, applied one step late.
  Oracle,
};

std::string_view to_string(ContextMode m);
ContextMode parse_context_mode(std::string_view name);

struct AdaptConfig {
  /// Steps collected before the learned context is used.
  std::size_t k = 50;
  double clip_lo = 0.93;
  double clip_hi = 1.07;
  /// Components with |predicted model delta| below this keep their previous value.
  double delta_floor = 1e-3;
  /// Weight on the previous context when blending; 0 disables smoothing.
  double ema = 0.0;
  /// Most recent (s, delta) pairs kept for the linear fit.
  std::size_t window = 100;
  double ridge = 1e-6;
  /// Bounds for the oracle context (and the logged oracle ratio).
  double oracle_clip_lo = 0.93;
  double oracle_clip_hi = 1.07;
  /// Act with tanh(mu) instead of sampling.
  bool deterministic = true;

  void validate() const;
};

/// z_i = delta_pred_i / delta_hat_i where |delta_hat_i| >= delta_floor, else
/// prev_i; clipped to [clip_lo, clip_hi]; then blended with prev when ema > 0.
ContextVector estimate_context(const Vec& delta_pred, const Vec& delta_hat, const AdaptConfig& cfg,
                               const ContextVector& prev);
/// Same rule with explicit clip bounds.
ContextVector estimate_context(const Vec& delta_pred, const Vec& delta_hat, const AdaptConfig& cfg,
                               const ContextVector& prev, double clip_lo, double clip_hi);

struct AdaptStep {
  std::size_t t = 0;  ///< 1-based
  double reward = 0.0;
  /// Context the policy acted with at this step.
  Vec context;
  /// clip(observed delta / model delta at the executed (s, a)).
  Vec oracle_context;
  /// In-sample R^2 of the linear model after this step's refit (NaN before two pairs).
  double r2 = 0.0;
};

struct AdaptResult {
  double total_return = 0.0;
  ContextMode mode = ContextMode::Default;
  std::vector<AdaptStep> log;
};

/// One zero-shot episode of length `horizon` in `env`. Each step acts with the
/// current context, steps the environment, refits the linear model on the
/// last `window` (s, delta) pairs and updates the context according to
/// `mode`. Rewards are accumulated for reporting only.
AdaptResult adapt_rollout(const Actor& actor, const EnsembleModel& model, const Environment& env,
                          std::size_t horizon, const AdaptConfig& cfg, ContextMode mode, Rng& rng);

}  // namespace augwm
