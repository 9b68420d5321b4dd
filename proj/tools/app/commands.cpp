#include "commands.hpp"

#include "run_config.hpp"
#include "svg_plot.hpp"

#include <augwm/checkpoint.hpp>
#include <augwm/csv.hpp>
#include <augwm/dataset_io.hpp>
#include <augwm/errors.hpp>
#include <augwm/welch.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace augwm::app {
namespace fs = std::filesystem;
namespace {

struct Binding {
  std::vector<std::string> keys;
  std::string value;
  CLI::Option* opt = nullptr;
};

struct Common {
  std::string config_file;
  std::string preset;
  std::vector<std::string> sets;
  bool plot = false;
  CLI::Option* plot_opt = nullptr;
  std::deque<Binding> flags;
};

void add_flag(CLI::App* sub, Common& c, const std::string& name, std::vector<std::string> keys, const std::string& doc) {
  Binding& b = c.flags.emplace_back();
  b.keys = std::move(keys);
  b.opt = sub->add_option(name, b.value, doc);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_file, "Config file of key = value lines");
  std::string names;
  for (const auto& p : presets()) names += (names.empty() ? "" : ", ") + p.name;
  sub->add_option("--preset", c.preset, "Named preset: " + names);
  sub->add_option("--set", c.sets, "Override any key: --set key=value (repeatable)");
  add_flag(sub, c, "--seed", {"seed"}, "Root seed");
  add_flag(sub, c, "--jobs", {"jobs"}, "Worker threads");
  add_flag(sub, c, "--env", {"env.kind"}, "Toy environment");
}

RunConfig build_config(const Common& c) {
  RunConfig cfg;
  if (!c.preset.empty()) cfg.apply_preset(c.preset);
  if (!c.config_file.empty()) cfg.merge_file(c.config_file);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    key.erase(0, key.find_first_not_of(' '));
    key.erase(key.find_last_not_of(' ') + 1);
    cfg.set(key, kv.substr(eq + 1));
  }
  for (const auto& b : c.flags)
    if (b.opt->count() > 0)
      for (const auto& k : b.keys) cfg.set(k, b.value);
  if (c.plot_opt != nullptr && c.plot_opt->count() > 0) cfg.set("eval.plot", c.plot ? "true" : "false");
  validate(cfg);
  return cfg;
}

std::string help_footer() {
  std::ostringstream s;
  s << "Configuration keys (file lines `key = value` or `[section]` headers; precedence: command line > "
       "config file > preset > default).\nOrigin: published = published hyperparameter, published-scaled = "
       "published value rescaled to the toy setting, desk-scale = chosen for the toy setting, plumbing = tool "
       "behaviour.\n\n";
  std::size_t width = 0;
  for (const auto& k : config_keys()) width = std::max(width, k.key.size());
  for (const auto& k : config_keys()) {
    s << "  " << k.key << std::string(width - k.key.size() + 2, ' ') << "[" << k.origin << "] default '"
      << k.default_value << "'\n      " << k.doc << "\n";
  }
  s << "\nPresets:\n";
  for (const auto& p : presets()) {
    s << "  " << p.name << ": " << p.doc << " (";
    for (std::size_t i = 0; i < p.values.size(); ++i)
      s << (i ? ", " : "") << p.values[i].first << "=" << p.values[i].second;
    s << ")\n";
  }
  return s.str();
}

std::string csv_text(const auto& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError(p.parent_path().string(), "cannot create directory: " + ec.message());
  }
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError(p.string(), "cannot create directory: " + ec.message());
}

// Snapshot without the worker count and file locations, which do not affect
// results; stored inside checkpoints so they stay byte-identical across
// --jobs and output directories.
std::string result_config(const RunConfig& c) {
  static const std::vector<std::string> skip = {"jobs", "data.path", "train.dir", "eval.out"};
  std::string out;
  for (const auto& k : config_keys())
    if (std::find(skip.begin(), skip.end(), k.key) == skip.end()) out += k.key + " = " + c.get(k.key) + "\n";
  return out;
}

int cmd_gen_data(const RunConfig& c, std::ostream& out) {
  const EnvKind kind = env_kind(c);
  const DynamicsParams params = data_params(c);
  const PolicyMix mix = policy_mix(c);
  const std::uint64_t seed = c.get_u64("seed");
  const std::size_t n = c.get_size("data.n");
  const std::size_t horizon = c.get_size("data.horizon");
  Rng rng(seed);
  const Dataset d = generate_offline_dataset(kind, params, mix, n, rng, horizon);

  const fs::path path = c.get("data.path");
  ensure_parent(path);
  save_dataset(d, path);

  nlohmann::ordered_json meta;
  meta["env"] = std::string(to_string(kind));
  meta["mass_scale"] = params.mass_scale;
  meta["damping_scale"] = params.damping_scale;
  meta["actuator_mask"] = c.get("env.actuator_mask");
  meta["dim_scale"] = c.get("env.dim_scale");
  meta["random_frac"] = mix.random_frac;
  meta["mediocre_frac"] = mix.mediocre_frac;
  meta["seed"] = seed;
  meta["n"] = d.size();
  meta["horizon"] = horizon;
  meta["s_dim"] = d.s_dim();
  meta["a_dim"] = d.a_dim();
  write_file(path.string() + ".meta.json", meta.dump(2) + "\n");
  out << "wrote " << d.size() << " transitions to " << path.string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const EnvKind kind = env_kind(c);
  const TrainConfig cfg = train_config(c);
  const Dataset d = load_dataset(c.get("data.path"));
  if (d.s_dim() != state_dim(kind) || d.a_dim() != action_dim(kind))
    throw ValidationError("dataset dimensions (" + std::to_string(d.s_dim()) + ", " + std::to_string(d.a_dim()) +
                          ") do not match env " + std::string(to_string(kind)));
  if (d.empty()) throw ValidationError("dataset is empty");

  const fs::path dir = c.get("train.dir");
  ensure_dir(dir);
  const std::string snapshot = c.snapshot();
  write_file(dir / "config.txt", snapshot);

  Rng rng(c.get_u64("seed"));
  EnsembleTrainConfig mcfg = cfg.model;
  mcfg.jobs = cfg.jobs;
  Rng model_rng = rng.split(7);
  EnsembleModel model = train_ensemble(d, mcfg, model_rng);
  model.training_config = result_config(c);
  save_model(model, dir / "model.json");
  out << "model: " << model.size() << " members, validation NLL";
  for (double v : model.validation_nll) out << " " << format_double(v);
  out << "\n";

  const std::size_t every = c.get_size("train.ckpt_every");
  std::vector<EpochMetrics> metrics;
  std::size_t last_saved = 0;
  const auto on_epoch = [&](const EpochMetrics& m, const Actor& actor, const Critics& critics) {
    metrics.push_back(m);
    if (every > 0 && m.epoch % every == 0) {
      save_policy(actor, critics, dir / "policy.json");
      last_saved = m.epoch;
      out << "epoch " << m.epoch << "/" << cfg.epochs << " model return " << format_double(m.mean_model_return)
          << " critic loss " << format_double(m.critic_loss) << "\n";
    }
  };
  Rng policy_rng = rng.split(8);
  try {
    PolicyTrainResult p = train_policy(model, d, cfg, policy_rng, on_epoch);
    save_policy(p.actor, p.critics, dir / "policy.json");
  } catch (const TrainingDiverged& e) {
    write_file(dir / "metrics.csv", csv_text([&](std::ostream& s) { write_metrics_csv(s, metrics); }));
    err << "error: training diverged after " << metrics.size() << " completed epochs: " << e.what() << "\n";
    if (last_saved > 0)
      err << "last good policy checkpoint (epoch " << last_saved << ") kept at " << (dir / "policy.json").string()
          << "\n";
    else
      err << "no policy checkpoint was written; the model checkpoint is kept\n";
    return 2;
  }
  write_file(dir / "metrics.csv", csv_text([&](std::ostream& s) { write_metrics_csv(s, metrics); }));
  out << "trained " << cfg.epochs << " epochs; checkpoints in " << dir.string() << "\n";
  return 0;
}

std::string mode_name(ContextMode m) { return std::string(to_string(m)); }

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const EnvKind kind = env_kind(c);
  const fs::path dir = c.get("train.dir");
  const EnsembleModel model = load_model(dir / "model.json");
  const PolicyCheckpoint policy = load_policy(dir / "policy.json");
  if (model.s_dim() != state_dim(kind) || policy.actor.s_dim != state_dim(kind))
    throw ValidationError("checkpoint dimensions do not match env " + std::string(to_string(kind)));

  const auto modes = eval_modes(c);
  for (ContextMode m : modes)
    if (policy.actor.ctx_dim == 0 && m != ContextMode::Default)
      throw ValidationError("mode '" + mode_name(m) + "' needs a context-conditioned policy (train with aug.use_context)");

  const AdaptConfig acfg = adapt_config(c);
  const GridEvalOptions opts = grid_options(c);
  const auto mass = c.get_doubles("eval.mass_grid");
  const auto damping = c.get_doubles("eval.damping_grid");
  const auto seeds = c.get_u64s("eval.seeds");
  const bool plot = c.get_bool("eval.plot");
  const fs::path out_dir = c.get("eval.out").empty() ? dir / "eval" : fs::path(c.get("eval.out"));
  ensure_dir(out_dir);
  write_file(out_dir / "config.txt", c.snapshot());

  std::vector<SummaryRow> rows;
  std::vector<double> first_seed_means;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string name = mode_name(modes[i]);
    const EvalGridResult r = grid_eval(policy.actor, model, kind, mass, damping, modes[i], seeds, acfg, opts);
    write_file(out_dir / ("grid_" + name + ".csv"), csv_text([&](std::ostream& s) { write_grid_csv(s, r); }));
    const GridSummary g = aggregate(r);
    SummaryRow row{name, g.mean, g.std, std::nullopt};
    if (i == 0) {
      first_seed_means = g.seed_means;
    } else {
      try {
        row.p_vs_baseline = welch_ttest(first_seed_means, g.seed_means).p;
      } catch (const ValidationError&) {
        // Too few seeds or zero spread: no p-value.
      }
    }
    rows.push_back(row);
    out << name << ": mean " << format_double(g.mean) << " std " << format_double(g.std) << "\n";

    if (plot) {
      std::vector<std::vector<double>> cells(mass.size(), std::vector<double>(damping.size()));
      for (std::size_t mi = 0; mi < mass.size(); ++mi)
        for (std::size_t di = 0; di < damping.size(); ++di) cells[mi][di] = r.cell_mean(mi, di);
      write_file(out_dir / ("heatmap_" + name + ".svg"),
                 svg_heatmap("Mean return, " + name + " context", mass, damping, cells, "mass scale", "damping scale"));
      std::vector<std::string> labels;
      std::vector<double> values;
      for (std::size_t mi = 0; mi < mass.size(); ++mi) {
        labels.push_back("m " + format_double(mass[mi]));
        values.push_back(g.mass_means[mi]);
      }
      for (std::size_t di = 0; di < damping.size(); ++di) {
        labels.push_back("d " + format_double(damping[di]));
        values.push_back(g.damping_means[di]);
      }
      write_file(out_dir / ("marginals_" + name + ".svg"),
                 svg_bars("Marginal mean return, " + name + " context", labels, values));
    }
  }
  write_file(out_dir / "summary.csv", csv_text([&](std::ostream& s) { write_summary_csv(s, rows); }));

  if (const auto sw = parse_switch(c.get("eval.switch"))) {
    SwitchSpec spec;
    spec.t_switch = sw->t;
    spec.params_after.mass_scale = sw->after_mass;
    spec.params_after.damping_scale = sw->after_damping;
    std::vector<Series> traces;
    for (ContextMode m : modes) {
      Rng rng(seeds.front());
      const SwitchTrace trace = switch_eval(policy.actor, model, kind, spec, opts.horizon, m, acfg, rng);
      write_file(out_dir / ("switch_" + mode_name(m) + ".csv"),
                 csv_text([&](std::ostream& s) { write_switch_csv(s, trace); }));
      traces.push_back({mode_name(m), trace.rolling_reward});
      out << "switch " << mode_name(m) << ": return " << format_double(trace.rollout.total_return) << "\n";
    }
    if (plot)
      write_file(out_dir / "switch_rewards.svg",
                 svg_lines("Rolling reward, switch at t = " + std::to_string(sw->t), traces, static_cast<double>(sw->t)));
  }
  out << "results in " << out_dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Offline model-based RL with augmented world models on toy control tasks", "augwm"};
  app.require_subcommand(1);
  const std::string footer = help_footer();
  app.footer(footer);

  Common gen, train, eval;
  auto* g = app.add_subcommand("gen-data", "Collect an offline dataset with the behaviour policy mix");
  add_common(g, gen);
  add_flag(g, gen, "--n", {"data.n"}, "Transitions to collect");
  add_flag(g, gen, "--random-frac", {"data.random_frac"}, "Share of random-policy steps");
  add_flag(g, gen, "--mediocre-frac", {"data.mediocre_frac"}, "Share of controller steps");
  add_flag(g, gen, "--out", {"data.path"}, "Dataset path");
  g->footer(footer);

  auto* t = app.add_subcommand("train", "Train the world model ensemble and the policy");
  add_common(t, train);
  add_flag(t, train, "--data", {"data.path"}, "Dataset path");
  add_flag(t, train, "--epochs", {"train.epochs"}, "Policy epochs (or auto)");
  add_flag(t, train, "--out", {"train.dir"}, "Checkpoint directory");
  t->footer(footer);

  auto* e = app.add_subcommand("eval", "Zero-shot evaluation over the dynamics grid");
  add_common(e, eval);
  add_flag(e, eval, "--ckpt", {"train.dir"}, "Checkpoint directory");
  add_flag(e, eval, "--mode", {"eval.modes"}, "Comma list: default, learned, oracle");
  add_flag(e, eval, "--grid", {"eval.mass_grid", "eval.damping_grid"}, "Same comma list for mass and damping");
  add_flag(e, eval, "--mass-grid", {"eval.mass_grid"}, "Mass multipliers");
  add_flag(e, eval, "--damping-grid", {"eval.damping_grid"}, "Damping multipliers");
  add_flag(e, eval, "--seeds", {"eval.seeds"}, "Evaluation seeds");
  add_flag(e, eval, "--switch", {"eval.switch"}, "t=..,after_mass=..,after_damping=..");
  add_flag(e, eval, "--out", {"eval.out"}, "Output directory");
  eval.plot_opt = e->add_flag("--plot", eval.plot, "Write SVG figures");
  e->footer(footer);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& ex) {
    const int rc = app.exit(ex, out, err);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (g->parsed()) return cmd_gen_data(build_config(gen), out);
    if (t->parsed()) return cmd_train(build_config(train), out, err);
    return cmd_eval(build_config(eval), out);
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  }
}

}  // namespace augwm::app
