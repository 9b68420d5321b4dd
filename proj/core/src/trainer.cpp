#include "augwm/trainer.hpp"

#include "augwm/errors.hpp"
#include "augwm/parallel.hpp"

#include <cmath>
#include <string>

namespace augwm {
namespace {

// Rollouts are batched in fixed-size chunks so floating-point results do not
// depend on how many worker threads run them.
constexpr std::size_t kRolloutChunk = 32;

void fill_input_column(Mat& states, Mat& actions, Eigen::Index j, const Transition& t) {
  states.col(j) = t.state;
  actions.col(j) = t.action;
}

}  // namespace

void TrainConfig::validate() const {
  if (h < 1) throw ValidationError("train: rollout horizon h must be at least 1");
  if (rollout_batch < 1) throw ValidationError("train: rollout batch B must be at least 1");
  if (!(real_data_frac >= 0.0 && real_data_frac <= 1.0))
    throw ValidationError("train: real_data_frac must lie in [0, 1]");
  if (!(lambda >= 0.0)) throw ValidationError("train: lambda must be non-negative");
  if (batch < 1) throw ValidationError("train: batch must be positive");
  if (buffer_capacity < 1) throw ValidationError("train: buffer capacity must be positive");
  if (!(sac.gamma > 0.0 && sac.gamma < 1.0)) throw ValidationError("train: gamma must lie in (0, 1)");
  if (!(sac.alpha > 0.0)) throw ValidationError("train: alpha must be positive");
  if (!(sac.tau > 0.0 && sac.tau <= 1.0)) throw ValidationError("train: tau must lie in (0, 1]");
  if (!(sac.actor_lr >= 0.0) || !(sac.critic_lr >= 0.0)) throw ValidationError("train: learning rates must be non-negative");
  if (model.n < 2) throw ValidationError("train: ensemble size must be at least 2");
  aug_range.validate();
}

RolloutStats rollout_batch(const EnsembleModel& model, const Actor& actor, const Dataset& d_env,
                           const TrainConfig& cfg, ReplayBuffer& buf, Rng& rng) {
  if (model.empty()) throw ValidationError("rollout_batch: untrained model");
  if (d_env.empty()) throw ValidationError("rollout_batch: empty dataset");
  const auto s_dim = static_cast<Eigen::Index>(model.s_dim());
  const auto a_dim = static_cast<Eigen::Index>(model.a_dim());
  if (actor.s_dim != model.s_dim() || actor.a_dim != model.a_dim())
    throw ValidationError("rollout_batch: actor and model dimensions differ");
  if (cfg.use_context != (actor.ctx_dim > 0))
    throw ValidationError("rollout_batch: use_context does not match the actor's ctx_dim");

  const std::size_t total = cfg.rollout_batch;
  std::vector<std::size_t> starts(total);
  for (auto& s : starts) s = rng.index(d_env.size());
  const std::uint64_t stream_base = rng();

  std::vector<std::vector<Transition>> traces(total);
  std::vector<double> returns(total, 0.0);
  std::vector<char> cut(total, 0);
  const std::size_t chunks = (total + kRolloutChunk - 1) / kRolloutChunk;

  parallel_for(chunks, cfg.jobs, [&](std::size_t c) {
    const std::size_t first = c * kRolloutChunk;
    const auto m = static_cast<Eigen::Index>(std::min(kRolloutChunk, total - first));
    std::vector<Rng> rngs;
    rngs.reserve(static_cast<std::size_t>(m));
    Mat states(s_dim, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      rngs.emplace_back(stream_base, first + static_cast<std::size_t>(j));
      states.col(j) = d_env[starts[first + static_cast<std::size_t>(j)]].state;
    }
    const Mat contexts = cfg.use_context ? Mat(Mat::Ones(s_dim, m)) : Mat(0, m);

    for (std::size_t step = 0; step < cfg.h; ++step) {
      Mat noise(a_dim, m);
      for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < a_dim; ++i) noise(i, j) = rngs[static_cast<std::size_t>(j)].normal();
      const Mat actions = sample_policy(actor, actor.inputs(states, contexts), noise).actions;

      std::vector<MemberOutput> outs;
      outs.reserve(model.size());
      for (std::size_t k = 0; k < model.size(); ++k) outs.push_back(model.member_output(k, states, actions));
      Vec u = Vec::Zero(m);
      if (cfg.penalty == PenaltyKind::MaxAleatoric) {
        for (const auto& o : outs) u = u.cwiseMax(o.std.colwise().norm().transpose());
      } else {
        Mat avg = Mat::Zero(s_dim + 1, m);
        for (const auto& o : outs) avg += o.mean;
        avg /= static_cast<double>(outs.size());
        for (const auto& o : outs) u = u.cwiseMax((o.mean - avg).colwise().norm().transpose());
      }

      for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t r = first + static_cast<std::size_t>(j);
        if (cut[r]) continue;
        Rng& rr = rngs[static_cast<std::size_t>(j)];
        const MemberOutput& o = outs[rr.index(outs.size())];
        Vec sample(s_dim + 1);
        for (Eigen::Index i = 0; i <= s_dim; ++i) sample[i] = o.mean(i, j) + o.std(i, j) * rr.normal();
        const Vec next = states.col(j) + sample.head(s_dim);
        const double reward = sample[s_dim];
        if (!next.allFinite() || !std::isfinite(reward) || !std::isfinite(u[j])) {
          cut[r] = 1;
          continue;
        }
        const double pr = penalized_reward(reward, u[j], cfg.lambda);
        traces[r].push_back(Transition{states.col(j), actions.col(j), pr, next, false});
        returns[r] += pr;
        states.col(j) = next;
      }
    }
  });

  RolloutStats stats;
  double sum = 0.0;
  for (std::size_t r = 0; r < total; ++r) {
    for (auto& t : traces[r]) buf.push(std::move(t));
    stats.added += traces[r].size();
    stats.nonfinite += cut[r] ? 1 : 0;
    sum += returns[r];
  }
  stats.mean_return = sum / static_cast<double>(total);
  return stats;
}

SacBatch sample_training_batch(const Dataset& d_env, const ReplayBuffer& buf, const TrainConfig& cfg, Rng& rng) {
  if (d_env.empty()) throw ValidationError("sample_training_batch: empty dataset");
  const auto s_dim = static_cast<Eigen::Index>(d_env.s_dim());
  const auto a_dim = static_cast<Eigen::Index>(d_env.a_dim());
  const auto n = static_cast<Eigen::Index>(cfg.batch);
  const std::size_t n_real =
      buf.empty() ? cfg.batch : static_cast<std::size_t>(std::lround(cfg.real_data_frac * static_cast<double>(cfg.batch)));
  const Eigen::Index ctx_rows = cfg.use_context ? s_dim : 0;

  SacBatch b;
  b.states.resize(s_dim, n);
  b.contexts.resize(ctx_rows, n);
  b.actions.resize(a_dim, n);
  b.rewards.resize(n);
  b.next_states.resize(s_dim, n);
  b.next_contexts.resize(ctx_rows, n);
  b.dones.resize(n);

  for (Eigen::Index j = 0; j < n; ++j) {
    const bool real = static_cast<std::size_t>(j) < n_real;
    const Transition& src = real ? d_env[rng.index(d_env.size())] : buf[rng.index(buf.size())];
    Transition t;
    Vec context = Vec::Ones(s_dim);
    if (cfg.aug != AugKind::None) {
      const ContextVector z = sample_z(cfg.aug_range, d_env.s_dim(), rng);
      t = apply(cfg.aug, z, src);
      context = z.values();
    } else {
      t = src;
    }
    fill_input_column(b.states, b.actions, j, t);
    b.rewards[j] = t.reward;
    b.next_states.col(j) = t.next_state;
    b.dones[j] = t.done ? 1.0 : 0.0;
    if (cfg.use_context) {
      b.contexts.col(j) = context;
      b.next_contexts.col(j) = context;
    }
  }
  return b;
}

PolicyTrainResult train_policy(const EnsembleModel& model, const Dataset& d_env, const TrainConfig& cfg, Rng& rng,
                               const EpochCallback& on_epoch) {
  cfg.validate();
  if (d_env.empty()) throw ValidationError("train: empty dataset");
  if (model.empty()) throw ValidationError("train: untrained model");

  const std::size_t s_dim = d_env.s_dim();
  const std::size_t ctx = cfg.use_context ? s_dim : 0;
  Rng actor_rng = rng.split(1);
  Rng critic_rng = rng.split(2);
  PolicyTrainResult out{Actor(s_dim, d_env.a_dim(), ctx, cfg.sac, actor_rng),
                        Critics(s_dim, d_env.a_dim(), ctx, cfg.sac, critic_rng), {}};
  ReplayBuffer buf(cfg.buffer_capacity);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng erng = rng.split(1000 + epoch);
    const RolloutStats stats = rollout_batch(model, out.actor, d_env, cfg, buf, erng);

    double critic_loss = 0.0;
    double actor_loss = 0.0;
    for (std::size_t g = 0; g < cfg.grad_steps; ++g) {
      const SacBatch batch = sample_training_batch(d_env, buf, cfg, erng);
      critic_loss += critic_update(out.critics, out.actor, batch, cfg.sac.critic_lr, erng);
      actor_loss += actor_update(out.actor, out.critics, batch.states, batch.contexts, cfg.sac.actor_lr, erng);
      target_sync(out.critics, cfg.sac.tau);
    }
    const double steps = static_cast<double>(std::max<std::size_t>(cfg.grad_steps, 1));
    EpochMetrics m{epoch, stats.mean_return, critic_loss / steps, actor_loss / steps, buf.size(), stats.nonfinite};
    out.metrics.push_back(m);

    if (!std::isfinite(m.critic_loss) || !std::isfinite(m.actor_loss) || !out.actor.net.all_finite() ||
        !out.critics.q1.all_finite() || !out.critics.q2.all_finite())
      throw TrainingDiverged("non-finite loss or parameters at epoch " + std::to_string(epoch));
    if (on_epoch) on_epoch(m, out.actor, out.critics);
  }
  return out;
}

TrainResult train(const Dataset& d_env, const TrainConfig& cfg, Rng& rng, const EpochCallback& on_epoch) {
  cfg.validate();
  if (d_env.empty()) throw ValidationError("train: empty dataset");
  EnsembleTrainConfig mcfg = cfg.model;
  mcfg.jobs = cfg.jobs;
  Rng model_rng = rng.split(7);
  EnsembleModel model = train_ensemble(d_env, mcfg, model_rng);
  Rng policy_rng = rng.split(8);
  PolicyTrainResult p = train_policy(model, d_env, cfg, policy_rng, on_epoch);
  return TrainResult{std::move(model), std::move(p.actor), std::move(p.critics), std::move(p.metrics)};
}

}  // namespace augwm
