#include "run_config.hpp"
#include "svg_plot.hpp"
#include "commands.hpp"

#include <augwm/errors.hpp>

#include <doctest.h>

#include <sstream>

using namespace augwm;
using namespace augwm::app;

TEST_CASE("defaults cover every key and validate") {
  RunConfig c;
  for (const auto& k : config_keys()) CHECK(c.get(k.key) == k.default_value);
  CHECK_NOTHROW(validate(c));
  const TrainConfig t = train_config(c);
  CHECK(t.epochs == 100);
  CHECK(t.grad_steps == 10);
  CHECK(t.aug == AugKind::None);
}

TEST_CASE("every key has a doc string and a known origin") {
  for (const auto& k : config_keys()) {
    CHECK_FALSE(k.doc.empty());
    const bool known = k.origin == "published" || k.origin == "published-scaled" || k.origin == "desk-scale" ||
                       k.origin == "plumbing";
    CHECK_MESSAGE(known, k.key);
  }
}

TEST_CASE("auto epochs depend on the augmentation") {
  RunConfig c;
  c.apply_preset("augwm-das");
  CHECK(train_config(c).epochs == 225);
  c.set("train.epochs", "7");
  CHECK(train_config(c).epochs == 7);
}

TEST_CASE("presets touch only augmentation and eval mode keys") {
  for (const auto& p : presets()) {
    RunConfig base, c;
    c.apply_preset(p.name);
    CHECK_NOTHROW(validate(c));
    for (const auto& k : config_keys()) {
      if (k.key == "aug.kind" || k.key == "aug.use_context" || k.key == "eval.modes") continue;
      CHECK_MESSAGE(c.get(k.key) == base.get(k.key), p.name << " changes " << k.key);
    }
  }
  RunConfig c;
  CHECK_THROWS_AS(c.apply_preset("nope"), ValidationError);
}

TEST_CASE("merge_text sections, comments and errors") {
  RunConfig c;
  c.merge_text("seed = 9  # root\n\n[model]\nepochs = 3\nhidden = 8, 8\n[]\njobs=2\n");
  CHECK(c.get_u64("seed") == 9);
  CHECK(c.get_size("model.epochs") == 3);
  CHECK(c.get_sizes("model.hidden") == std::vector<std::size_t>{8, 8});
  CHECK(c.get_size("jobs") == 2);

  try {
    c.merge_text("seed = 1\nbogus = 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(c.merge_text("[model\n"), ParseError);
  CHECK_THROWS_AS(c.merge_text("no equals\n"), ParseError);
  CHECK_THROWS_AS(c.set("model.nope", "1"), ValidationError);
}

TEST_CASE("snapshot reloads to the same configuration") {
  RunConfig c;
  c.apply_preset("augwm-rans");
  c.set("adapt.ema", "0.25");
  c.set("eval.switch", "t=50,after_mass=1.2,after_damping=0.8");
  RunConfig back;
  back.merge_text(c.snapshot());
  CHECK(back.snapshot() == c.snapshot());
}

TEST_CASE("typed getters reject bad values") {
  RunConfig c;
  c.set("data.n", "ten");
  CHECK_THROWS_AS(c.get_size("data.n"), ValidationError);
  CHECK_THROWS_AS(validate(c), ValidationError);
  c.set("data.n", "-3");
  CHECK_THROWS_AS(c.get_size("data.n"), ValidationError);
  c.set("aug.use_context", "maybe");
  CHECK_THROWS_AS(c.get_bool("aug.use_context"), ValidationError);
  c.set("eval.mass_grid", "1,,2");
  CHECK_THROWS_AS(c.get_doubles("eval.mass_grid"), ValidationError);
}

TEST_CASE("validation catches bad combinations") {
  const auto bad = [](const char* key, const char* value) {
    RunConfig c;
    c.set(key, value);
    CHECK_THROWS_AS(validate(c), ValidationError);
  };
  bad("data.random_frac", "0.7");
  bad("env.kind", "cartpole");
  bad("aug.kind", "mixup");
  bad("eval.modes", "default,psychic");
  bad("eval.modes", "");
  bad("adapt.clip_lo", "1.2");
  bad("eval.seeds", "");
  bad("eval.switch", "t=0");
  bad("eval.switch", "t=100,colour=red");
  bad("jobs", "0");
  bad("model.holdout", "1");
  bad("env.actuator_mask", "2");
  bad("env.mass_scale", "-1");
}

TEST_CASE("parse_switch") {
  CHECK_FALSE(parse_switch("").has_value());
  const auto s = parse_switch(" t=120, after_mass=0.6 ");
  REQUIRE(s.has_value());
  CHECK(s->t == 120);
  CHECK(s->after_mass == 0.6);
  CHECK(s->after_damping == 0.5);
  CHECK_THROWS_AS(parse_switch("t"), ValidationError);
}

TEST_CASE("data params carry mask and scale") {
  RunConfig c;
  c.set("env.kind", "pointmass");
  c.set("env.actuator_mask", "1,0");
  c.set("env.dim_scale", "1,1,2,2");
  CHECK_NOTHROW(validate(c));
  const DynamicsParams p = data_params(c);
  CHECK(p.actuator_mask == std::vector<bool>{true, false});
  CHECK(p.dim_scale.size() == 4);
  CHECK(p.dim_scale[3] == 2.0);
}

TEST_CASE("run_cli exit codes without touching files") {
  std::ostringstream out, err;
  CHECK(run_cli({"--help"}, out, err) == 0);
  CHECK(out.str().find("adapt.oracle_clip_hi") != std::string::npos);
  CHECK(run_cli({}, out, err) == 1);
  CHECK(run_cli({"frobnicate"}, out, err) == 1);
  CHECK(run_cli({"gen-data", "--set", "nokey=1"}, out, err) == 1);
  CHECK(run_cli({"gen-data", "--set", "noequals"}, out, err) == 1);
  CHECK(run_cli({"gen-data", "--preset", "nope"}, out, err) == 1);
  CHECK(run_cli({"gen-data", "--config", "/nonexistent/x.cfg"}, out, err) == 2);
}

TEST_CASE("svg output is a closed document with escaped text") {
  const std::string h = svg_heatmap("a<b", {1, 2}, {3}, {{1.0}, {2.0}}, "m", "d");
  CHECK(h.rfind("<svg", 0) == 0);
  CHECK(h.find("a&lt;b") != std::string::npos);
  CHECK(h.ends_with("</svg>\n"));
  const std::string b = svg_bars("t", {"x", "y"}, {-1.0, 2.0});
  CHECK(b.find("<rect") != std::string::npos);
  const std::string l = svg_lines("t", {{"s", {1.0, 2.0, std::nan("")}}}, 2.0);
  CHECK(l.find("polyline") != std::string::npos);
}
