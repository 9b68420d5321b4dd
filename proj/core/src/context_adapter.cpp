#include "augwm/context_adapter.hpp"

#include "augwm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <string>

namespace augwm {

std::string_view to_string(ContextMode m) {
  switch (m) {
    case ContextMode::Default: return "default";
    case ContextMode::Learned: return "learned";
    case ContextMode::Oracle: return "oracle";
  }
  return "unknown";
}

ContextMode parse_context_mode(std::string_view name) {
  if (name == "default") return ContextMode::Default;
  if (name == "learned") return ContextMode::Learned;
  if (name == "oracle") return ContextMode::Oracle;
  throw ValidationError("unknown context mode '" + std::string(name) + "'");
}

void AdaptConfig::validate() const {
  if (k < 1) throw ValidationError("adapt: k must be at least 1");
  if (!(clip_lo > 0.0 && clip_lo <= 1.0 && clip_hi >= 1.0 && std::isfinite(clip_hi)))
    throw ValidationError("adapt: clip bounds must satisfy 0 < clip_lo <= 1 <= clip_hi");
  if (!(oracle_clip_lo > 0.0 && oracle_clip_lo <= 1.0 && oracle_clip_hi >= 1.0 && std::isfinite(oracle_clip_hi)))
    throw ValidationError("adapt: oracle clip bounds must satisfy 0 < lo <= 1 <= hi");
  if (!(ema >= 0.0 && ema < 1.0)) throw ValidationError("adapt: ema must lie in [0, 1)");
  if (!(delta_floor >= 0.0)) throw ValidationError("adapt: delta_floor must be non-negative");
  if (window < 2) throw ValidationError("adapt: window must hold at least two pairs");
  if (!(ridge >= 0.0)) throw ValidationError("adapt: ridge must be non-negative");
}

ContextVector estimate_context(const Vec& delta_pred, const Vec& delta_hat, const AdaptConfig& cfg,
                               const ContextVector& prev, double clip_lo, double clip_hi) {
  if (delta_pred.size() != delta_hat.size() || static_cast<std::size_t>(delta_hat.size()) != prev.size())
    throw ValidationError("estimate_context: length mismatch");
  Vec z(delta_hat.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double p = prev.values()[i];
    double zi = std::abs(delta_hat[i]) >= cfg.delta_floor ? delta_pred[i] / delta_hat[i] : p;
    if (std::isnan(zi)) zi = p;
    zi = std::clamp(zi, clip_lo, clip_hi);
    if (cfg.ema > 0.0) zi = cfg.ema * p + (1.0 - cfg.ema) * zi;
    z[i] = zi;
  }
  return ContextVector(std::move(z));
}

ContextVector estimate_context(const Vec& delta_pred, const Vec& delta_hat, const AdaptConfig& cfg,
                               const ContextVector& prev) {
  return estimate_context(delta_pred, delta_hat, cfg, prev, cfg.clip_lo, cfg.clip_hi);
}

AdaptResult adapt_rollout(const Actor& actor, const EnsembleModel& model, const Environment& env,
                          std::size_t horizon, const AdaptConfig& cfg, ContextMode mode, Rng& rng) {
  cfg.validate();
  if (horizon < 1) throw ValidationError("adapt_rollout: horizon must be at least 1");
  if (horizon > env.horizon()) throw ValidationError("adapt_rollout: horizon exceeds the environment's");
  if (model.empty()) throw ValidationError("adapt_rollout: untrained model");
  if (actor.ctx_dim == 0 && mode != ContextMode::Default)
    throw ValidationError("adapt_rollout: a policy without context supports only the default mode");
  const std::size_t s_dim = env.state_dim();
  if (actor.s_dim != s_dim || model.s_dim() != s_dim || actor.a_dim != env.action_dim())
    throw ValidationError("adapt_rollout: dimension mismatch between actor, model and environment");

  const ActMode act_mode = cfg.deterministic ? ActMode::Deterministic : ActMode::Stochastic;
  const bool has_ctx = actor.ctx_dim > 0;
  const auto policy = [&](const Vec& s, const ContextVector& z) {
    return act(actor, s, has_ctx ? std::optional<ContextVector>(z) : std::nullopt, act_mode, rng);
  };

  AdaptResult result;
  result.mode = mode;
  result.log.reserve(horizon);

  ContextVector z = ContextVector::ones(s_dim);
  ContextVector oracle = ContextVector::ones(s_dim);
  std::deque<std::pair<Vec, Vec>> window;
  EnvState state = env.reset(rng);

  for (std::size_t t = 1; t <= horizon; ++t) {
    const Vec a = policy(state.observation, z);
    StepResult step = env.step(state, a);
    const Vec& s = state.observation;
    const Vec& s_next = step.next.observation;
    const Vec delta = s_next - s;
    result.total_return += step.reward;

    window.emplace_back(s, delta);
    if (window.size() > cfg.window) window.pop_front();
    Mat xs(static_cast<Eigen::Index>(s_dim), static_cast<Eigen::Index>(window.size()));
    Mat ds(xs.rows(), xs.cols());
    for (std::size_t j = 0; j < window.size(); ++j) {
      xs.col(static_cast<Eigen::Index>(j)) = window[j].first;
      ds.col(static_cast<Eigen::Index>(j)) = window[j].second;
    }
    const LinearDynModel lin = fit_linear(xs, ds, cfg.ridge);

    const Vec model_delta = predict_mean(model, s, a).delta_mean;
    oracle = estimate_context(delta, model_delta, cfg, oracle, cfg.oracle_clip_lo, cfg.oracle_clip_hi);

    result.log.push_back(AdaptStep{t, step.reward, z.values(), oracle.values(),
                                   lin.fitted ? r_squared(lin, xs, ds) : std::numeric_limits<double>::quiet_NaN()});

    switch (mode) {
      case ContextMode::Default:
        break;
      case ContextMode::Oracle:
        z = oracle;
        break;
      case ContextMode::Learned:
        if (t >= cfg.k && lin.fitted) {
          // Candidate action under the previous context gives the model's
          // predicted delta at the next state.
          const Vec candidate = policy(s_next, z);
          const Vec delta_hat = predict_mean(model, s_next, candidate).delta_mean;
          z = estimate_context(lin.predict(s_next), delta_hat, cfg, z);
        }
        break;
    }
    state = std::move(step.next);
  }
  return result;
}

}  // namespace augwm
