#pragma once

#include "augwm/core_types.hpp"
#include "augwm/mlp.hpp"
#include "augwm/rng.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace augwm {

struct SacConfig {
  double gamma = 0.99;
  /// Fixed entropy temperature.
  double alpha = 0.2;
  double tau = 0.005;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  std::vector<std::size_t> hidden = {64, 64};
  Activation activation = Activation::Relu;
};

enum class ActMode { Stochastic, Deterministic };

/// Squashed-Gaussian policy over (state, context). The network emits A_DIM
/// means followed by A_DIM log-stds, hard-clamped to [kLogStdMin, kLogStdMax].
struct Actor {
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;
  /// Pre-squash values are clamped to this magnitude.
  static constexpr double kPreTanhClamp = 10.0;

  Mlp net;
  std::size_t s_dim = 0;
  std::size_t a_dim = 0;
  /// 0 (no context) or s_dim.
  std::size_t ctx_dim = 0;
  AdamState optimizer;

  Actor() = default;
  Actor(std::size_t s_dim, std::size_t a_dim, std::size_t ctx_dim, const SacConfig& cfg, Rng& rng);
  /// Wraps an existing network (checkpoint loading, fixtures).
  Actor(Mlp net, std::size_t s_dim, std::size_t a_dim, std::size_t ctx_dim);

  std::size_t input_dim() const { return s_dim + ctx_dim; }
  /// Stacks states over contexts; `contexts` must have ctx_dim rows.
  Mat inputs(const Mat& states, const Mat& contexts) const;
};

/// Twin soft Q-functions over (state, context, action) with Polyak targets.
struct Critics {
  Mlp q1;
  Mlp q2;
  Mlp q1_target;
  Mlp q2_target;
  double gamma = 0.99;
  double alpha = 0.2;
  std::size_t s_dim = 0;
  std::size_t a_dim = 0;
  std::size_t ctx_dim = 0;
  AdamState opt1;
  AdamState opt2;

  Critics() = default;
  Critics(std::size_t s_dim, std::size_t a_dim, std::size_t ctx_dim, const SacConfig& cfg, Rng& rng);
  /// Targets start as copies of the given online networks.
  Critics(Mlp q1, Mlp q2, std::size_t s_dim, std::size_t a_dim, std::size_t ctx_dim, double gamma,
          double alpha);

  Mat inputs(const Mat& states, const Mat& contexts, const Mat& actions) const;
};

/// Batched squashed-Gaussian draw. With `noise` all zero this is the
/// deterministic action tanh(mu).
struct PolicySample {
  Mat actions;      ///< tanh(u)
  Vec log_prob;     ///< log pi(a | input) including the tanh correction
  Mat pre_tanh;     ///< u = mu + sigma * noise (clamped)
  Mat mean;
  Mat log_std;      ///< clamped
  Mat raw_log_std;  ///< before clamping
  Mat noise;
};

PolicySample sample_policy(const Actor& actor, const Mat& inputs, const Mat& noise, MlpCache* cache = nullptr);

/// Single action. `z` must be present exactly when actor.ctx_dim > 0.
Vec act(const Actor& actor, const Vec& s, const std::optional<ContextVector>& z, ActMode mode, Rng& rng);

/// Columns are (s, z, a, r, s', z', done) tuples; context rows may be 0.
struct SacBatch {
  Mat states;
  Mat contexts;
  Mat actions;
  Vec rewards;
  Mat next_states;
  Mat next_contexts;
  Vec dones;

  std::size_t size() const { return static_cast<std::size_t>(states.cols()); }
};

/// One Adam step on both critics toward
///   y = r + gamma (1 - done) (min_j Q'_j(s', z', a') - alpha log pi(a' | s', z')), a' ~ pi.
/// Returns the mean squared Bellman residual averaged over the two critics.
double critic_update(Critics& c, const Actor& actor, const SacBatch& batch, double lr, Rng& rng);

/// One reparameterised Adam step minimising E[alpha log pi - min_j Q_j].
/// Returns that loss.
double actor_update(Actor& actor, const Critics& c, const Mat& states, const Mat& contexts, double lr, Rng& rng);

/// target <- (1 - tau) target + tau online. tau must lie in (0, 1].
void target_sync(Critics& c, double tau);

}  // namespace augwm
