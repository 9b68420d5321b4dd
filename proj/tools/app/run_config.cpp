#include "run_config.hpp"

#include <augwm/errors.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace augwm::app {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  v = trim(v);
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ValidationError(std::string(key) + ": '" + std::string(v) + "' is not a number");
  return x;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  v = trim(v);
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ValidationError(std::string(key) + ": '" + std::string(v) + "' is not a non-negative integer");
  return x;
}

}  // namespace

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"seed", "1", "Root seed for data generation and training", "plumbing"},
      {"jobs", "1", "Worker threads; results do not depend on it", "plumbing"},
      {"env.kind", "msd", "Toy environment: msd, pointmass or pendulum", "desk-scale"},
      {"env.mass_scale", "1", "Mass multiplier of the data-collection environment", "plumbing"},
      {"env.damping_scale", "1", "Damping multiplier of the data-collection environment", "plumbing"},
      {"env.actuator_mask", "", "Comma list of 0/1 per actuator (empty = all on)", "plumbing"},
      {"env.dim_scale", "", "Comma list of observation scales (empty = ones)", "plumbing"},

      {"data.path", "data.jsonl", "Dataset file (JSON Lines); metadata goes to <path>.meta.json", "plumbing"},
      {"data.n", "20000", "Transitions to collect", "desk-scale"},
      {"data.random_frac", "0.5", "Share of steps taken by the uniform random policy", "desk-scale"},
      {"data.mediocre_frac", "0.5", "Share of steps taken by the scripted controller", "desk-scale"},
      {"data.horizon", "200", "Episode length while collecting", "desk-scale"},

      {"model.n", "5", "Ensemble members", "published"},
      {"model.epochs", "100", "Passes over the training split per member", "desk-scale"},
      {"model.batch", "256", "Minibatch size", "published"},
      {"model.lr", "0.001", "Adam learning rate", "published"},
      {"model.hidden", "64,64", "Hidden layer widths", "published-scaled"},
      {"model.holdout", "0.1", "Fraction held out for validation NLL", "desk-scale"},

      {"train.dir", "run", "Directory for checkpoints, metrics and the config snapshot", "plumbing"},
      {"train.epochs", "auto", "Policy epochs; auto = 100 without augmentation, 225 with", "published-scaled"},
      {"train.h", "5", "Model rollout horizon", "published"},
      {"train.lambda", "1", "Uncertainty penalty weight", "published"},
      {"train.rollout_batch", "256", "Parallel model rollouts per epoch", "published-scaled"},
      {"train.real_data_frac", "0.05", "Share of each SAC batch drawn from the offline data", "published"},
      {"train.grad_steps", "10", "SAC gradient steps per epoch", "desk-scale"},
      {"train.batch", "256", "SAC batch size", "published"},
      {"train.buffer", "200000", "Model replay buffer capacity", "desk-scale"},
      {"train.penalty", "max_aleatoric", "Uncertainty score: max_aleatoric or disagreement", "published"},
      {"train.ckpt_every", "25", "Write the policy checkpoint every K epochs (0 = only at the end)", "plumbing"},

      {"sac.gamma", "0.99", "Discount", "published"},
      {"sac.alpha", "0.2", "Fixed entropy temperature", "desk-scale"},
      {"sac.tau", "0.005", "Target network Polyak rate", "published"},
      {"sac.actor_lr", "0.0003", "Actor learning rate", "published"},
      {"sac.critic_lr", "0.0003", "Critic learning rate", "published"},
      {"sac.hidden", "64,64", "Actor and critic hidden widths", "published-scaled"},

      {"aug.kind", "none", "Training augmentation: none, rad, rans or das", "published"},
      {"aug.train_lo", "0.5", "Lower bound of the per-component z distribution", "published"},
      {"aug.train_hi", "1.5", "Upper bound of the per-component z distribution", "published"},
      {"aug.use_context", "false", "Feed z to actor and critics", "published"},

      {"adapt.k", "50", "Steps before the learned context is used", "published-scaled"},
      {"adapt.clip_lo", "0.93", "Lower test-time context bound", "published"},
      {"adapt.clip_hi", "1.07", "Upper test-time context bound", "published"},
      {"adapt.delta_floor", "0.001", "Smallest |model delta| used as a divisor", "desk-scale"},
      {"adapt.ema", "0", "Context smoothing weight in [0, 1)", "desk-scale"},
      {"adapt.window", "100", "Pairs kept for the linear model fit", "desk-scale"},
      {"adapt.ridge", "1e-06", "Ridge penalty of the linear model", "desk-scale"},
      {"adapt.oracle_clip_lo", "0.93", "Lower bound of the oracle context", "desk-scale"},
      {"adapt.oracle_clip_hi", "1.07", "Upper bound of the oracle context", "desk-scale"},
      {"adapt.deterministic", "true", "Act with tanh(mean) at evaluation", "desk-scale"},

      {"eval.out", "", "Output directory (empty = <train.dir>/eval)", "plumbing"},
      {"eval.modes", "default", "Comma list of context modes: default, learned, oracle", "published"},
      {"eval.mass_grid", "0.5,0.75,1,1.25,1.5", "Mass multipliers", "published"},
      {"eval.damping_grid", "0.5,0.75,1,1.25,1.5", "Damping multipliers", "published"},
      {"eval.seeds", "1,2,3,4,5", "Evaluation seeds; Welch samples are per-seed grid means", "published"},
      {"eval.rollouts", "5", "Episodes per cell and seed", "published"},
      {"eval.horizon", "200", "Episode length", "desk-scale"},
      {"eval.switch", "", "Mid-episode change, e.g. t=100,after_mass=0.75,after_damping=0.5", "published-scaled"},
      {"eval.plot", "false", "Also write SVG heatmaps, marginal bars and switch traces", "plumbing"},
  };
  return keys;
}

const std::vector<PresetSpec>& presets() {
  static const std::vector<PresetSpec> p = {
      {"mopo-baseline", "Uncertainty-penalised model-based baseline", {{"aug.kind", "none"}, {"aug.use_context", "false"}}},
      {"augwm-das", "DAS with context, evaluated with the all-ones context",
       {{"aug.kind", "das"}, {"aug.use_context", "true"}}},
      {"augwm-das-context", "DAS with context, evaluated with the learned context",
       {{"aug.kind", "das"}, {"aug.use_context", "true"}, {"eval.modes", "learned"}}},
      {"augwm-rad", "RAD with context", {{"aug.kind", "rad"}, {"aug.use_context", "true"}}},
      {"augwm-rans", "RANS with context", {{"aug.kind", "rans"}, {"aug.use_context", "true"}}},
  };
  return p;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_.emplace(k.key, k.default_value);
}

void RunConfig::set(std::string_view key, std::string value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  it->second = std::string(trim(value));
}

void RunConfig::apply_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name != name) continue;
    for (const auto& [k, v] : p.values) set(k, v);
    return;
  }
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

void RunConfig::merge_text(std::string_view text) {
  std::string section;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (!values_.contains(full)) throw ParseError(line_no, "unknown config key '" + full + "'");
    set(full, std::string(line.substr(eq + 1)));
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    merge_text(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

double RunConfig::get_double(std::string_view key) const { return to_double(key, get(key)); }

std::size_t RunConfig::get_size(std::string_view key) const { return static_cast<std::size_t>(to_u64(key, get(key))); }

std::uint64_t RunConfig::get_u64(std::string_view key) const { return to_u64(key, get(key)); }

bool RunConfig::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError(std::string(key) + ": '" + v + "' is not a boolean");
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
  std::vector<std::string> out;
  const std::string& v = get(key);
  if (trim(v).empty()) return out;
  for (std::string_view item : split(v, ',')) {
    if (item.empty()) throw ValidationError(std::string(key) + ": empty list item");
    out.emplace_back(item);
  }
  return out;
}

std::vector<double> RunConfig::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (const auto& s : get_list(key)) out.push_back(to_double(key, s));
  return out;
}

std::vector<std::size_t> RunConfig::get_sizes(std::string_view key) const {
  std::vector<std::size_t> out;
  for (const auto& s : get_list(key)) out.push_back(static_cast<std::size_t>(to_u64(key, s)));
  return out;
}

std::vector<std::uint64_t> RunConfig::get_u64s(std::string_view key) const {
  std::vector<std::uint64_t> out;
  for (const auto& s : get_list(key)) out.push_back(to_u64(key, s));
  return out;
}

std::string RunConfig::snapshot() const {
  std::string out;
  for (const auto& k : config_keys()) out += k.key + " = " + get(k.key) + "\n";
  return out;
}

std::optional<SwitchOption> parse_switch(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  SwitchOption s;
  for (std::string_view part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw ValidationError("eval.switch: expected name=value, got '" + std::string(part) + "'");
    const std::string_view name = trim(part.substr(0, eq));
    const std::string_view value = part.substr(eq + 1);
    if (name == "t") s.t = static_cast<std::size_t>(to_u64("eval.switch t", value));
    else if (name == "after_mass") s.after_mass = to_double("eval.switch after_mass", value);
    else if (name == "after_damping") s.after_damping = to_double("eval.switch after_damping", value);
    else throw ValidationError("eval.switch: unknown field '" + std::string(name) + "'");
  }
  return s;
}

EnvKind env_kind(const RunConfig& c) { return parse_env_kind(c.get("env.kind")); }

PolicyMix policy_mix(const RunConfig& c) {
  PolicyMix mix{c.get_double("data.random_frac"), c.get_double("data.mediocre_frac")};
  if (!(mix.random_frac >= 0.0) || !(mix.mediocre_frac >= 0.0) ||
      std::abs(mix.random_frac + mix.mediocre_frac - 1.0) > 1e-9)
    throw ValidationError("data.random_frac + data.mediocre_frac must sum to 1");
  return mix;
}

DynamicsParams data_params(const RunConfig& c) {
  DynamicsParams p;
  p.mass_scale = c.get_double("env.mass_scale");
  p.damping_scale = c.get_double("env.damping_scale");
  for (std::size_t b : c.get_sizes("env.actuator_mask")) {
    if (b > 1) throw ValidationError("env.actuator_mask: entries must be 0 or 1");
    p.actuator_mask.push_back(b == 1);
  }
  const auto scale = c.get_doubles("env.dim_scale");
  if (!scale.empty()) p.dim_scale = Eigen::Map<const Vec>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  return p;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.h = c.get_size("train.h");
  t.lambda = c.get_double("train.lambda");
  t.rollout_batch = c.get_size("train.rollout_batch");
  t.real_data_frac = c.get_double("train.real_data_frac");
  t.aug = parse_aug_kind(c.get("aug.kind"));
  t.aug_range = AugRange{c.get_double("aug.train_lo"), c.get_double("aug.train_hi")};
  t.use_context = c.get_bool("aug.use_context");
  if (c.get("train.epochs") == "auto") {
    t.epochs = t.aug == AugKind::None ? 100 : 225;
  } else {
    t.epochs = c.get_size("train.epochs");
  }
  t.grad_steps = c.get_size("train.grad_steps");
  t.batch = c.get_size("train.batch");
  t.buffer_capacity = c.get_size("train.buffer");
  t.penalty = parse_penalty_kind(c.get("train.penalty"));
  t.sac.gamma = c.get_double("sac.gamma");
  t.sac.alpha = c.get_double("sac.alpha");
  t.sac.tau = c.get_double("sac.tau");
  t.sac.actor_lr = c.get_double("sac.actor_lr");
  t.sac.critic_lr = c.get_double("sac.critic_lr");
  t.sac.hidden = c.get_sizes("sac.hidden");
  t.model.n = c.get_size("model.n");
  t.model.epochs = c.get_size("model.epochs");
  t.model.batch = c.get_size("model.batch");
  t.model.lr = c.get_double("model.lr");
  t.model.hidden = c.get_sizes("model.hidden");
  t.model.holdout_frac = c.get_double("model.holdout");
  t.jobs = c.get_size("jobs");
  return t;
}

AdaptConfig adapt_config(const RunConfig& c) {
  AdaptConfig a;
  a.k = c.get_size("adapt.k");
  a.clip_lo = c.get_double("adapt.clip_lo");
  a.clip_hi = c.get_double("adapt.clip_hi");
  a.delta_floor = c.get_double("adapt.delta_floor");
  a.ema = c.get_double("adapt.ema");
  a.window = c.get_size("adapt.window");
  a.ridge = c.get_double("adapt.ridge");
  a.oracle_clip_lo = c.get_double("adapt.oracle_clip_lo");
  a.oracle_clip_hi = c.get_double("adapt.oracle_clip_hi");
  a.deterministic = c.get_bool("adapt.deterministic");
  return a;
}

GridEvalOptions grid_options(const RunConfig& c) {
  GridEvalOptions o;
  o.rollouts_per_cell = c.get_size("eval.rollouts");
  o.horizon = c.get_size("eval.horizon");
  o.jobs = c.get_size("jobs");
  return o;
}

std::vector<ContextMode> eval_modes(const RunConfig& c) {
  std::vector<ContextMode> out;
  for (const auto& m : c.get_list("eval.modes")) out.push_back(parse_context_mode(m));
  if (out.empty()) throw ValidationError("eval.modes: at least one mode is required");
  return out;
}

void validate(const RunConfig& c) {
  const EnvKind kind = env_kind(c);
  c.get_u64("seed");
  if (c.get_size("jobs") < 1) throw ValidationError("jobs must be at least 1");
  if (c.get("data.path").empty()) throw ValidationError("data.path must not be empty");
  if (c.get_size("data.n") < 1) throw ValidationError("data.n must be positive");
  if (c.get_size("data.horizon") < 1) throw ValidationError("data.horizon must be positive");
  policy_mix(c);
  data_params(c).validate(kind);

  const TrainConfig t = train_config(c);
  t.validate();
  if (t.sac.hidden.empty()) throw ValidationError("sac.hidden needs at least one layer");
  if (!(t.model.holdout_frac >= 0.0 && t.model.holdout_frac < 1.0))
    throw ValidationError("model.holdout must lie in [0, 1)");
  if (t.model.batch < 1) throw ValidationError("model.batch must be positive");
  if (!(t.model.lr > 0.0)) throw ValidationError("model.lr must be positive");
  c.get_size("train.ckpt_every");

  adapt_config(c).validate();
  const auto modes = eval_modes(c);
  const auto mass = c.get_doubles("eval.mass_grid");
  const auto damping = c.get_doubles("eval.damping_grid");
  if (mass.empty() || damping.empty()) throw ValidationError("eval grids must not be empty");
  for (double m : mass) DynamicsParams{m, 1.0, {}, {}}.validate(kind);
  for (double d : damping) DynamicsParams{1.0, d, {}, {}}.validate(kind);
  if (c.get_u64s("eval.seeds").empty()) throw ValidationError("eval.seeds must not be empty");
  const GridEvalOptions o = grid_options(c);
  if (o.rollouts_per_cell < 1) throw ValidationError("eval.rollouts must be positive");
  if (o.horizon < 1) throw ValidationError("eval.horizon must be positive");
  if (const auto sw = parse_switch(c.get("eval.switch"))) {
    SwitchSpec spec;
    spec.t_switch = sw->t;
    spec.params_after.mass_scale = sw->after_mass;
    spec.params_after.damping_scale = sw->after_damping;
    spec.validate(kind, o.horizon);
  }
  c.get_bool("eval.plot");
}

}  // namespace augwm::app
