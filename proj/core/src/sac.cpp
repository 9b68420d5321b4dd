#include "augwm/sac.hpp"

#include "augwm/errors.hpp"

#include <cmath>
#include <numbers>

namespace augwm {
namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

// log(1 - tanh(u)^2) without cancellation.
double log_one_minus_tanh_sq(double u) { return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u)); }

Mat standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void check_ctx(std::size_t s_dim, std::size_t ctx_dim) {
  if (ctx_dim != 0 && ctx_dim != s_dim) throw ValidationError("context dimension must be 0 or the state dimension");
}

}  // namespace

Actor::Actor(std::size_t s, std::size_t a, std::size_t ctx, const SacConfig& cfg, Rng& rng)
    : net(layer_sizes(s + ctx, cfg.hidden, 2 * a), cfg.activation, rng), s_dim(s), a_dim(a), ctx_dim(ctx) {
  check_ctx(s, ctx);
  optimizer = AdamState::for_network(net, AdamConfig{.lr = cfg.actor_lr});
}

Actor::Actor(Mlp n, std::size_t s, std::size_t a, std::size_t ctx)
    : net(std::move(n)), s_dim(s), a_dim(a), ctx_dim(ctx) {
  check_ctx(s, ctx);
  if (net.input_dim() != s + ctx || net.output_dim() != 2 * a)
    throw ValidationError("actor network has inconsistent dimensions");
  optimizer = AdamState::for_network(net, AdamConfig{});
}

Mat Actor::inputs(const Mat& states, const Mat& contexts) const {
  if (static_cast<std::size_t>(states.rows()) != s_dim) throw ValidationError("actor: state dimension mismatch");
  if (static_cast<std::size_t>(contexts.rows()) != ctx_dim)
    throw ValidationError("actor: context dimension does not match ctx_dim");
  if (ctx_dim == 0) return states;
  if (contexts.cols() != states.cols()) throw ValidationError("actor: context batch size mismatch");
  Mat x(states.rows() + contexts.rows(), states.cols());
  x << states, contexts;
  return x;
}

Critics::Critics(std::size_t s, std::size_t a, std::size_t ctx, const SacConfig& cfg, Rng& rng)
    : q1(layer_sizes(s + ctx + a, cfg.hidden, 1), cfg.activation, rng),
      q2(layer_sizes(s + ctx + a, cfg.hidden, 1), cfg.activation, rng),
      q1_target(q1),
      q2_target(q2),
      gamma(cfg.gamma),
      alpha(cfg.alpha),
      s_dim(s),
      a_dim(a),
      ctx_dim(ctx) {
  check_ctx(s, ctx);
  opt1 = AdamState::for_network(q1, AdamConfig{.lr = cfg.critic_lr});
  opt2 = AdamState::for_network(q2, AdamConfig{.lr = cfg.critic_lr});
}

Critics::Critics(Mlp n1, Mlp n2, std::size_t s, std::size_t a, std::size_t ctx, double g, double al)
    : q1(std::move(n1)), q2(std::move(n2)), q1_target(q1), q2_target(q2), gamma(g), alpha(al), s_dim(s),
      a_dim(a), ctx_dim(ctx) {
  check_ctx(s, ctx);
  for (const Mlp* q : {&q1, &q2}) {
    if (q->input_dim() != s + ctx + a || q->output_dim() != 1)
      throw ValidationError("critic network has inconsistent dimensions");
  }
  opt1 = AdamState::for_network(q1, AdamConfig{});
  opt2 = AdamState::for_network(q2, AdamConfig{});
}

Mat Critics::inputs(const Mat& states, const Mat& contexts, const Mat& actions) const {
  if (static_cast<std::size_t>(states.rows()) != s_dim || static_cast<std::size_t>(contexts.rows()) != ctx_dim ||
      static_cast<std::size_t>(actions.rows()) != a_dim)
    throw ValidationError("critic: input dimension mismatch");
  Mat x(states.rows() + contexts.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  if (ctx_dim > 0) x.middleRows(states.rows(), contexts.rows()) = contexts;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

PolicySample sample_policy(const Actor& actor, const Mat& inputs, const Mat& noise, MlpCache* cache) {
  const auto a = static_cast<Eigen::Index>(actor.a_dim);
  if (noise.rows() != a || noise.cols() != inputs.cols()) throw ValidationError("policy noise has the wrong shape");
  const Mat out = cache ? actor.net.forward(inputs, *cache) : actor.net.forward(inputs);

  PolicySample p;
  p.mean = out.topRows(a);
  p.raw_log_std = out.bottomRows(a);
  p.log_std = p.raw_log_std.cwiseMax(Actor::kLogStdMin).cwiseMin(Actor::kLogStdMax);
  p.noise = noise;
  p.pre_tanh = (p.mean.array() + p.log_std.array().exp() * noise.array())
                   .cwiseMax(-Actor::kPreTanhClamp)
                   .cwiseMin(Actor::kPreTanhClamp)
                   .matrix();
  p.actions = p.pre_tanh.array().tanh().matrix();

  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  p.log_prob.resize(inputs.cols());
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < a; ++i) {
      lp += -0.5 * noise(i, j) * noise(i, j) - p.log_std(i, j) - half_log_2pi -
            log_one_minus_tanh_sq(p.pre_tanh(i, j));
    }
    p.log_prob[j] = lp;
  }
  return p;
}

Vec act(const Actor& actor, const Vec& s, const std::optional<ContextVector>& z, ActMode mode, Rng& rng) {
  if ((actor.ctx_dim > 0) != z.has_value()) throw ValidationError("act: context presence does not match ctx_dim");
  const Mat contexts = z ? Mat(z->values()) : Mat(0, 1);
  const Mat x = actor.inputs(Mat(s), contexts);
  const auto a = static_cast<Eigen::Index>(actor.a_dim);
  const Mat noise = mode == ActMode::Stochastic ? standard_normal(a, 1, rng) : Mat::Zero(a, 1);
  return sample_policy(actor, x, noise).actions.col(0);
}

double critic_update(Critics& c, const Actor& actor, const SacBatch& batch, double lr, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n == 0) throw ValidationError("critic_update: empty batch");

  const Mat next_in = actor.inputs(batch.next_states, batch.next_contexts);
  const PolicySample next = sample_policy(actor, next_in, standard_normal(static_cast<Eigen::Index>(actor.a_dim), n, rng));
  const Mat next_q_in = c.inputs(batch.next_states, batch.next_contexts, next.actions);
  const Mat tq = c.q1_target.forward(next_q_in).cwiseMin(c.q2_target.forward(next_q_in));
  const Vec y = batch.rewards.array() + c.gamma * (1.0 - batch.dones.array()) *
                                            (tq.row(0).transpose().array() - c.alpha * next.log_prob.array());

  const Mat q_in = c.inputs(batch.states, batch.contexts, batch.actions);
  double loss = 0.0;
  MlpCache cache;
  for (auto [net, opt] : {std::pair{&c.q1, &c.opt1}, std::pair{&c.q2, &c.opt2}}) {
    const Mat q = net->forward(q_in, cache);
    const Mat resid = q - y.transpose();
    loss += resid.squaredNorm() / static_cast<double>(n);
    opt->config.lr = lr;
    adam_step(*net, net->backward(cache, 2.0 * resid / static_cast<double>(n)), *opt);
  }
  return 0.5 * loss;
}

double actor_update(Actor& actor, const Critics& c, const Mat& states, const Mat& contexts, double lr, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(states.cols());
  if (n == 0) throw ValidationError("actor_update: empty batch");
  const auto a = static_cast<Eigen::Index>(actor.a_dim);
  const double inv_n = 1.0 / static_cast<double>(n);

  MlpCache actor_cache;
  const PolicySample p = sample_policy(actor, actor.inputs(states, contexts), standard_normal(a, n, rng), &actor_cache);

  const Mat q_in = c.inputs(states, contexts, p.actions);
  MlpCache c1, c2;
  const Mat q1 = c.q1.forward(q_in, c1);
  const Mat q2 = c.q2.forward(q_in, c2);
  Mat g1 = Mat::Zero(1, n);
  Mat g2 = Mat::Zero(1, n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool first = q1(0, j) <= q2(0, j);
    (first ? g1 : g2)(0, j) = -inv_n;
    loss += c.alpha * p.log_prob[j] - (first ? q1(0, j) : q2(0, j));
  }
  loss *= inv_n;

  const Mat dq_in = c.q1.backward(c1, g1).input + c.q2.backward(c2, g2).input;
  const Mat d_action = dq_in.bottomRows(a);

  Mat d_raw(2 * a, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < a; ++i) {
      const double act_ij = p.actions(i, j);
      const double u = p.pre_tanh(i, j);
      double du = d_action(i, j) * (1.0 - act_ij * act_ij) + c.alpha * inv_n * 2.0 * act_ij;
      if (std::abs(u) >= Actor::kPreTanhClamp) du = 0.0;
      d_raw(i, j) = du;
      double dls = du * std::exp(p.log_std(i, j)) * p.noise(i, j) - c.alpha * inv_n;
      const double raw = p.raw_log_std(i, j);
      if (raw < Actor::kLogStdMin || raw > Actor::kLogStdMax) dls = 0.0;
      d_raw(a + i, j) = dls;
    }
  }
  actor.optimizer.config.lr = lr;
  adam_step(actor.net, actor.net.backward(actor_cache, d_raw), actor.optimizer);
  return loss;
}

void target_sync(Critics& c, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("target_sync: tau must lie in (0, 1]");
  polyak_update(c.q1_target, c.q1, tau);
  polyak_update(c.q2_target, c.q2, tau);
}

}  // namespace augwm
