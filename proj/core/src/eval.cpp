#include "augwm/eval.hpp"

#include "augwm/errors.hpp"
#include "augwm/parallel.hpp"

#include <cmath>
#include <string>

namespace augwm {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

void EvalGridResult::validate() const {
  if (mass.empty() || damping.empty() || seeds.empty()) throw ValidationError("grid result: empty axis");
  if (returns.size() != mass.size() * damping.size() * seeds.size())
    throw ValidationError("grid result: returns size does not match |mass| x |damping| x |seeds|");
}

double EvalGridResult::at(std::size_t mi, std::size_t di, std::size_t si) const {
  return returns.at((mi * damping.size() + di) * seeds.size() + si);
}

double& EvalGridResult::at(std::size_t mi, std::size_t di, std::size_t si) {
  return returns.at((mi * damping.size() + di) * seeds.size() + si);
}

double EvalGridResult::cell_mean(std::size_t mi, std::size_t di) const {
  double s = 0.0;
  for (std::size_t k = 0; k < seeds.size(); ++k) s += at(mi, di, k);
  return s / static_cast<double>(seeds.size());
}

double EvalGridResult::cell_std(std::size_t mi, std::size_t di) const {
  std::vector<double> v(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) v[k] = at(mi, di, k);
  return pop_std(v);
}

EvalGridResult grid_eval(const Actor& actor, const EnsembleModel& model, EnvKind kind,
                         const std::vector<double>& mass, const std::vector<double>& damping, ContextMode mode,
                         const std::vector<std::uint64_t>& seeds, const AdaptConfig& cfg,
                         const GridEvalOptions& opts) {
  if (mass.empty() || damping.empty()) throw ValidationError("grid_eval: empty grid");
  if (seeds.empty()) throw ValidationError("grid_eval: no seeds");
  if (opts.rollouts_per_cell < 1) throw ValidationError("grid_eval: rollouts_per_cell must be at least 1");
  cfg.validate();
  for (double m : mass) DynamicsParams{m, 1.0, {}, {}}.validate(kind);
  for (double d : damping) DynamicsParams{1.0, d, {}, {}}.validate(kind);
  if (actor.ctx_dim == 0 && mode != ContextMode::Default)
    throw ValidationError("grid_eval: a policy without context supports only the default mode");

  EvalGridResult out;
  out.mass = mass;
  out.damping = damping;
  out.seeds = seeds;
  out.mode = mode;
  out.returns.assign(mass.size() * damping.size() * seeds.size(), 0.0);

  const std::size_t n_tasks = out.returns.size();
  parallel_for(n_tasks, opts.jobs, [&](std::size_t task) {
    const std::size_t si = task % seeds.size();
    const std::size_t cell = task / seeds.size();
    const std::size_t di = cell % damping.size();
    const std::size_t mi = cell / damping.size();
    const ToyEnvironment env(kind, DynamicsParams{mass[mi], damping[di], {}, {}}, opts.horizon);
    const Rng base(seeds[si]);
    double total = 0.0;
    for (std::size_t r = 0; r < opts.rollouts_per_cell; ++r) {
      Rng rng = base.split(r);
      total += adapt_rollout(actor, model, env, opts.horizon, cfg, mode, rng).total_return;
    }
    out.returns[task] = total / static_cast<double>(opts.rollouts_per_cell);
  });
  return out;
}

double oracle_eval(const Actor& actor, const EnsembleModel& model, const Environment& env, std::size_t horizon,
                   const AdaptConfig& cfg, Rng& rng) {
  if (actor.ctx_dim == 0) throw ValidationError("oracle_eval: the policy takes no context");
  return adapt_rollout(actor, model, env, horizon, cfg, ContextMode::Oracle, rng).total_return;
}

void SwitchSpec::validate(EnvKind kind, std::size_t horizon) const {
  if (!(t_switch > 0 && t_switch < horizon))
    throw ValidationError("switch: t_switch must satisfy 0 < t_switch < horizon (" + std::to_string(horizon) + ")");
  params_before.validate(kind);
  params_after.validate(kind);
}

SwitchingEnvironment::SwitchingEnvironment(EnvKind kind, SwitchSpec spec, std::size_t horizon)
    : kind_(kind), spec_(std::move(spec)), horizon_(horizon) {
  spec_.validate(kind_, horizon_);
}

EnvState SwitchingEnvironment::reset(Rng& rng) const { return augwm::reset(kind_, spec_.params_before, rng); }

StepResult SwitchingEnvironment::step(const EnvState& s, const Vec& action) const {
  const DynamicsParams& p = s.step_count < spec_.t_switch ? spec_.params_before : spec_.params_after;
  return augwm::step(kind_, p, s, action, horizon_);
}

SwitchTrace switch_eval(const Actor& actor, const EnsembleModel& model, EnvKind kind, const SwitchSpec& spec,
                        std::size_t horizon, ContextMode mode, const AdaptConfig& cfg, Rng& rng) {
  const SwitchingEnvironment env(kind, spec, horizon);
  SwitchTrace trace;
  trace.rollout = adapt_rollout(actor, model, env, horizon, cfg, mode, rng);
  const auto& log = trace.rollout.log;
  trace.rolling_reward.resize(log.size());
  trace.cumulative_return.resize(log.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    cum += log[i].reward;
    trace.cumulative_return[i] = cum;
    const std::size_t lo = i + 1 >= kRollingWindow ? i + 1 - kRollingWindow : 0;
    double s = 0.0;
    for (std::size_t j = lo; j <= i; ++j) s += log[j].reward;
    trace.rolling_reward[i] = s / static_cast<double>(i + 1 - lo);
  }
  return trace;
}

GridSummary aggregate(const EvalGridResult& r) {
  r.validate();
  const std::size_t nm = r.mass.size(), nd = r.damping.size(), ns = r.seeds.size();
  GridSummary s;
  s.seed_means.assign(ns, 0.0);
  for (std::size_t k = 0; k < ns; ++k) {
    double t = 0.0;
    for (std::size_t i = 0; i < nm; ++i)
      for (std::size_t j = 0; j < nd; ++j) t += r.at(i, j, k);
    s.seed_means[k] = t / static_cast<double>(nm * nd);
  }
  s.mean = mean_of(s.seed_means);
  s.std = pop_std(s.seed_means);
  s.mass_means.assign(nm, 0.0);
  s.damping_means.assign(nd, 0.0);
  for (std::size_t i = 0; i < nm; ++i)
    for (std::size_t j = 0; j < nd; ++j) {
      const double c = r.cell_mean(i, j);
      s.mass_means[i] += c / static_cast<double>(nd);
      s.damping_means[j] += c / static_cast<double>(nm);
    }
  return s;
}

}  // namespace augwm
