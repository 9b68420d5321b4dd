#include "scaled_env.hpp"

#include <augwm/context_adapter.hpp>
#include <augwm/errors.hpp>
#include <augwm/linear_model.hpp>
#include <augwm/toy_envs.hpp>

#include <doctest.h>

#include <chrono>
#include <cmath>

using namespace augwm;

namespace {

// Ensemble with no hidden layer: its mean delta is affine in (s, a).
const EnsembleModel& linear_model() {
  static const EnsembleModel m = [] {
    Rng rng(11);
    Dataset d = generate_offline_dataset(EnvKind::MassSpringDamper, {}, {0.5, 0.5}, 2000, rng);
    EnsembleTrainConfig cfg;
    cfg.n = 2;
    cfg.epochs = 5;
    cfg.hidden = {};
    Rng mrng(12);
    return train_ensemble(d, cfg, mrng);
  }();
  return m;
}

double mse(const Mat& xs, const Mat& ds, const Mat& w, const Vec& c) {
  return ((w * xs).colwise() + c - ds).squaredNorm() / static_cast<double>(xs.cols());
}

}  // namespace

TEST_CASE("fit_linear interpolates two points exactly") {
  Mat xs(1, 2), ds(1, 2);
  xs << 1, 2;
  ds << 2, 4;
  const LinearDynModel m = fit_linear(xs, ds, 0.0);
  REQUIRE(m.fitted);
  CHECK(m.weight(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.bias[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_linear on a constant target gives zero slope") {
  Rng rng(3);
  Mat xs(2, 50), ds(2, 50);
  for (Eigen::Index j = 0; j < 50; ++j) {
    xs(0, j) = rng.uniform(-1, 1);
    xs(1, j) = rng.uniform(-1, 1);
    ds(0, j) = 0.3;
    ds(1, j) = -1.2;
  }
  const LinearDynModel m = fit_linear(xs, ds, 1e-6);
  CHECK(m.weight.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(m.bias[0] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(m.bias[1] == doctest::Approx(-1.2).epsilon(1e-6));
}

TEST_CASE("fit_linear with a single pair is unfitted") {
  Mat xs(1, 1), ds(1, 1);
  xs << 1;
  ds << 1;
  const LinearDynModel m = fit_linear(xs, ds, 0.0);
  CHECK_FALSE(m.fitted);
  CHECK_THROWS_AS(m.predict(Vec(Vec::Ones(1))), ValidationError);
  CHECK_THROWS_AS(r_squared(m, xs, ds), ValidationError);
}

TEST_CASE("fit_linear recovers A from noisy samples") {
  Rng rng(5);
  Mat a(2, 2);
  a << 0.4, -0.7, 1.1, 0.2;
  Vec b(2);
  b << 0.05, -0.3;
  Mat xs(2, 500), ds(2, 500);
  for (Eigen::Index j = 0; j < 500; ++j) {
    xs.col(j) << rng.uniform(-1, 1), rng.uniform(-1, 1);
    ds.col(j) = a * xs.col(j) + b;
    ds(0, j) += 0.01 * rng.normal();
    ds(1, j) += 0.01 * rng.normal();
  }
  const LinearDynModel m = fit_linear(xs, ds, 1e-6);
  CHECK((m.weight - a).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("fit_linear is the ridge minimiser") {
  Rng rng(8);
  const double ridge = 0.5;
  Mat xs(3, 40), ds(3, 40);
  for (Eigen::Index j = 0; j < 40; ++j)
    for (Eigen::Index i = 0; i < 3; ++i) {
      xs(i, j) = rng.uniform(-1, 1);
      ds(i, j) = rng.normal();
    }
  const LinearDynModel m = fit_linear(xs, ds, ridge);
  const auto objective = [&](const Mat& w, const Vec& c) {
    return mse(xs, ds, w, c) * static_cast<double>(xs.cols()) + ridge * w.squaredNorm();
  };
  const double best = objective(m.weight, m.bias);
  for (int trial = 0; trial < 100; ++trial) {
    Mat w = m.weight;
    Vec c = m.bias;
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] += 1e-3 * rng.normal();
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] += 1e-3 * rng.normal();
    CHECK(objective(w, c) >= best);
  }
}

TEST_CASE("r_squared reference values") {
  Mat xs(1, 4), ds(1, 4);
  xs << 0, 1, 2, 3;
  ds << 1, 3, 5, 7;
  const LinearDynModel exact = fit_linear(xs, ds, 0.0);
  CHECK(r_squared(exact, xs, ds) == doctest::Approx(1.0).epsilon(1e-12));

  LinearDynModel mean_only;
  mean_only.weight = Mat::Zero(1, 1);
  mean_only.bias = Vec::Constant(1, 4.0);
  mean_only.fitted = true;
  CHECK(r_squared(mean_only, xs, ds) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("r_squared on noiseless linear dynamics") {
  // Constant action on the spring-damper: delta is affine in the state.
  Rng rng(4);
  EnvState s = reset(EnvKind::MassSpringDamper, {}, rng);
  Mat xs(2, 100), ds(2, 100);
  const Vec a = Vec::Constant(1, 0.6);
  for (Eigen::Index j = 0; j < 100; ++j) {
    StepResult r = step(EnvKind::MassSpringDamper, {}, s, a);
    xs.col(j) = s.observation;
    ds.col(j) = r.next.observation - s.observation;
    s = r.next;
  }
  const LinearDynModel m = fit_linear(xs, ds, 1e-6);
  CHECK(r_squared(m, xs, ds) > 0.999);
}

TEST_CASE("estimate_context examples") {
  AdaptConfig cfg;
  const ContextVector ones = ContextVector::ones(2);
  Vec pred(2), hat(2);
  pred << 0.2, -0.4;
  hat << 0.1, -0.2;
  const ContextVector z = estimate_context(pred, hat, cfg, ones);
  CHECK(z[0] == 1.07);
  CHECK(z[1] == 1.07);

  const ContextVector same = estimate_context(hat, hat, cfg, ContextVector(Vec::Constant(2, 1.05)));
  CHECK(same.values() == Vec::Ones(2));

  Vec tiny(2);
  tiny << 1e-4, -0.1;
  Vec prev(2);
  prev << 0.95, 1.0;
  const ContextVector kept = estimate_context(pred, tiny, cfg, ContextVector(prev));
  CHECK(kept[0] == 0.95);
  CHECK(kept[1] == 1.07);

  CHECK_THROWS_AS(estimate_context(Vec::Ones(3), hat, cfg, ones), ValidationError);
}

TEST_CASE("estimate_context ema blends toward the previous value") {
  AdaptConfig cfg;
  cfg.ema = 0.5;
  Vec pred(1), hat(1);
  pred << 1.02;
  hat << 1.0;
  const ContextVector z = estimate_context(pred, hat, cfg, ContextVector::ones(1));
  CHECK(z[0] == doctest::Approx(1.01).epsilon(1e-12));
}

TEST_CASE("AdaptConfig validation") {
  AdaptConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.clip_lo = 1.01;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.ema = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  CHECK(parse_context_mode("learned") == ContextMode::Learned);
  CHECK_THROWS_AS(parse_context_mode("bogus"), ValidationError);
}

TEST_CASE("default mode keeps the all-ones context") {
  const EnsembleModel& model = linear_model();
  const Actor actor = testing::constant_actor(2, 2, Vec::Constant(1, 0.3));
  ToyEnvironment env(EnvKind::MassSpringDamper, {});
  Rng rng(1);
  const AdaptResult r = adapt_rollout(actor, model, env, 200, {}, ContextMode::Default, rng);
  REQUIRE(r.log.size() == 200);
  for (const AdaptStep& s : r.log) CHECK(s.context == Vec::Ones(2));
  CHECK(r.log[0].t == 1);
  CHECK(std::isnan(r.log[0].r2));
}

TEST_CASE("learned context recovers the scale of a scaled-model environment") {
  const EnsembleModel& model = linear_model();
  const Actor actor = testing::constant_actor(2, 2, Vec::Constant(1, 0.5));
  Vec c(2);
  c << 1.05, 0.97;
  testing::ScaledModelEnvironment env(model, c);
  AdaptConfig cfg;
  Rng rng(2);
  const auto t0 = std::chrono::steady_clock::now();
  const AdaptResult r = adapt_rollout(actor, model, env, 200, cfg, ContextMode::Learned, rng);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 5.0);
  CHECK((r.log[cfg.k + 49].context - c).lpNorm<Eigen::Infinity>() < 0.02);
  for (const AdaptStep& s : r.log) {
    if (s.t <= cfg.k) {
      CHECK(s.context == Vec::Ones(2));
    } else {
      CHECK(s.context.minCoeff() >= cfg.clip_lo);
      CHECK(s.context.maxCoeff() <= cfg.clip_hi);
    }
  }
}

TEST_CASE("learned context stays within bounds on a far-off environment") {
  const EnsembleModel& model = linear_model();
  const Actor actor = testing::constant_actor(2, 2, Vec::Constant(1, -0.4));
  testing::ScaledModelEnvironment env(model, Vec::Constant(2, 1.4));
  AdaptConfig cfg;
  Rng rng(3);
  const AdaptResult r = adapt_rollout(actor, model, env, 120, cfg, ContextMode::Learned, rng);
  for (std::size_t t = cfg.k; t < r.log.size(); ++t) {
    CHECK(r.log[t].context.minCoeff() >= cfg.clip_lo);
    CHECK(r.log[t].context.maxCoeff() <= cfg.clip_hi);
  }
  CHECK(r.log.back().context == Vec::Constant(2, cfg.clip_hi));
}

TEST_CASE("oracle context matches the scale one step late") {
  const EnsembleModel& model = linear_model();
  const Actor actor = testing::constant_actor(2, 2, Vec::Constant(1, 0.5));
  Vec c(2);
  c << 0.95, 1.03;
  testing::ScaledModelEnvironment env(model, c);
  Rng rng(4);
  const AdaptResult r = adapt_rollout(actor, model, env, 50, {}, ContextMode::Oracle, rng);
  CHECK(r.log[0].context == Vec::Ones(2));
  for (std::size_t t = 1; t < r.log.size(); ++t) {
    CHECK((r.log[t].context - c).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(r.log[t].context == r.log[t - 1].oracle_context);
  }
}

TEST_CASE("adapt_rollout input errors") {
  const EnsembleModel& model = linear_model();
  ToyEnvironment env(EnvKind::MassSpringDamper, {});
  Rng rng(5);
  const Actor plain = testing::constant_actor(2, 0, Vec::Constant(1, 0.1));
  CHECK_THROWS_AS(adapt_rollout(plain, model, env, 10, {}, ContextMode::Learned, rng), ValidationError);
  CHECK_THROWS_AS(adapt_rollout(plain, model, env, 10, {}, ContextMode::Oracle, rng), ValidationError);
  CHECK_NOTHROW(adapt_rollout(plain, model, env, 10, {}, ContextMode::Default, rng));
  CHECK_THROWS_AS(adapt_rollout(plain, model, env, 201, {}, ContextMode::Default, rng), ValidationError);
  CHECK_THROWS_AS(adapt_rollout(plain, model, env, 0, {}, ContextMode::Default, rng), ValidationError);
  ToyEnvironment pm(EnvKind::PointMass2D, {});
  CHECK_THROWS_AS(adapt_rollout(plain, model, pm, 10, {}, ContextMode::Default, rng), ValidationError);
}
