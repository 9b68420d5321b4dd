#include <augwm/errors.hpp>
#include <augwm/toy_envs.hpp>
#include <augwm/world_model.hpp>

#include <doctest.h>

#include <cmath>

using namespace augwm;

namespace {

struct Fitted {
  Dataset train{2, 1};
  Dataset test{2, 1};
  EnsembleModel model;
};

// Ensemble fitted once on the noiseless mass-spring-damper data.
const Fitted& fitted() {
  static const Fitted f = [] {
    Fitted out;
    Rng data_rng(100);
    out.train = generate_offline_dataset(EnvKind::MassSpringDamper, {}, {0.5, 0.5}, 5000, data_rng);
    Rng test_rng(200);
    out.test = generate_offline_dataset(EnvKind::MassSpringDamper, {}, {0.5, 0.5}, 1000, test_rng);
    EnsembleTrainConfig cfg;
    cfg.n = 3;
    cfg.epochs = 200;
    Rng rng(1);
    out.model = train_ensemble(out.train, cfg, rng);
    return out;
  }();
  return f;
}

// Members with zero weights whose raw log-std output is `raw_log_std`.
EnsembleModel constant_ensemble(std::vector<double> raw_log_std, std::size_t s_dim, std::size_t a_dim) {
  std::vector<Mlp> members;
  const auto out = static_cast<Eigen::Index>(s_dim + 1);
  for (double r : raw_log_std) {
    Mlp m = Mlp::zeros({s_dim + a_dim, 8, 2 * (s_dim + 1)}, Activation::Tanh);
    m.layers().back().bias.tail(out).setConstant(r);
    members.push_back(std::move(m));
  }
  NormStats norm{Vec::Zero(static_cast<Eigen::Index>(s_dim + a_dim)), Vec::Ones(static_cast<Eigen::Index>(s_dim + a_dim))};
  return EnsembleModel(std::move(members), norm, s_dim, a_dim);
}

}  // namespace

TEST_CASE("linear dynamics are fitted to within 0.01 RMSE") {
  const Fitted& f = fitted();
  REQUIRE(f.model.validation_nll.size() == 3);
  for (double v : f.model.validation_nll) CHECK(std::isfinite(v));
  double se = 0.0, worst = 0.0;
  for (const auto& t : f.test.transitions()) {
    const Vec truth = t.next_state - t.state;
    const Vec err = predict_mean(f.model, t.state, t.action).delta_mean - truth;
    se += err.squaredNorm();
    worst = std::max(worst, err.cwiseAbs().maxCoeff());
  }
  const double rmse = std::sqrt(se / static_cast<double>(2 * f.test.size()));
  MESSAGE("held-out delta RMSE " << rmse << ", worst component error " << worst);
  CHECK(rmse < 0.01);
  CHECK(worst < 0.02);
}

TEST_CASE("predict: sampling mode is reproducible and in range") {
  const Fitted& f = fitted();
  const Vec s = f.test[0].state, a = f.test[0].action;
  Rng r1(3), r2(3);
  for (int i = 0; i < 20; ++i) {
    const ModelPrediction p = predict(f.model, s, a, PredictMode::SampleMember, r1);
    const ModelPrediction q = predict(f.model, s, a, PredictMode::SampleMember, r2);
    REQUIRE(p.member_index.has_value());
    CHECK(*p.member_index == *q.member_index);
    CHECK(*p.member_index < 3);
    CHECK(p.delta_std.minCoeff() > 0.0);
    CHECK(p.reward_std > 0.0);
  }
  CHECK_FALSE(predict(f.model, s, a, PredictMode::MeanOfMeans, r1).member_index.has_value());
}

TEST_CASE("predict and uncertainty are invariant to member order") {
  const Fitted& f = fitted();
  std::vector<Mlp> rev(f.model.members().rbegin(), f.model.members().rend());
  const EnsembleModel flipped(rev, f.model.norm(), 2, 1);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& t = f.test[i];
    const ModelPrediction p = predict_mean(f.model, t.state, t.action);
    const ModelPrediction q = predict_mean(flipped, t.state, t.action);
    CHECK((p.delta_mean - q.delta_mean).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(p.reward_mean - q.reward_mean) < 1e-14);
    CHECK(uncertainty(f.model, t.state, t.action) == uncertainty(flipped, t.state, t.action));
    CHECK(uncertainty(f.model, t.state, t.action, PenaltyKind::Disagreement) ==
          doctest::Approx(uncertainty(flipped, t.state, t.action, PenaltyKind::Disagreement)).epsilon(1e-12));
  }
}

TEST_CASE("mean of identical members equals a single member") {
  Rng rng(4);
  const Mlp m({3, 8, 6}, Activation::Tanh, rng);
  const NormStats norm{Vec::Zero(3), Vec::Ones(3)};
  const EnsembleModel e({m, m, m}, norm, 2, 1);
  const Vec s = Vec::Constant(2, 0.3), a = Vec::Constant(1, -0.2);
  const MemberOutput one = e.member_output(0, Mat(s), Mat(a));
  const ModelPrediction p = predict_mean(e, s, a);
  CHECK((p.delta_mean - one.mean.col(0).head(2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("uncertainty: closed form and max semantics") {
  const EnsembleModel low = constant_ensemble({-1e4, -1e4, -1e4}, 2, 1);
  const Vec s = Vec::Constant(2, 0.7), a = Vec::Constant(1, 0.1);
  CHECK(uncertainty(low, s, a) == doctest::Approx(std::exp(-5.0) * std::sqrt(3.0)).epsilon(1e-14));

  const EnsembleModel one_high = constant_ensemble({-1e4, 1e4, -1e4}, 2, 1);
  CHECK(uncertainty(one_high, s, a) == doctest::Approx(std::exp(2.0) * std::sqrt(3.0)).epsilon(1e-14));
  CHECK(uncertainty(one_high, s, a) > uncertainty(low, s, a));
  // Identical members never disagree.
  CHECK(uncertainty(low, s, a, PenaltyKind::Disagreement) == 0.0);
}

TEST_CASE("uncertainty grows out of distribution") {
  const Fitted& f = fitted();
  Vec lo = f.train[0].state, hi = lo;
  for (const auto& t : f.train.transitions()) {
    lo = lo.cwiseMin(t.state);
    hi = hi.cwiseMax(t.state);
  }
  const Vec c = (lo + hi) / 2, w = (hi - lo) / 2;
  Rng rng(6);
  double in = 0.0, out = 0.0;
  const int n = 500;
  for (int i = 0; i < n; ++i) {
    const auto& t = f.test[static_cast<std::size_t>(i)];
    in += uncertainty(f.model, t.state, t.action);
    Vec s(2);
    for (int k = 0; k < 2; ++k) s[k] = c[k] + 5.0 * w[k] * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    out += uncertainty(f.model, s, t.action);
  }
  MESSAGE("mean u in " << in / n << ", out " << out / n);
  CHECK(out / n > in / n);
}

TEST_CASE("train_ensemble: identical members without bootstrap") {
  Rng data(7);
  const Dataset d = generate_offline_dataset(EnvKind::MassSpringDamper, {}, {0.5, 0.5}, 600, data);
  EnsembleTrainConfig cfg;
  cfg.n = 2;
  cfg.epochs = 3;
  cfg.hidden = {16};
  cfg.bootstrap = false;
  cfg.shared_member_stream = true;
  Rng rng(8);
  const EnsembleModel m = train_ensemble(d, cfg, rng);
  CHECK(m.members()[0] == m.members()[1]);
}

TEST_CASE("train_ensemble: zero epochs keeps the initialisation") {
  Rng data(9);
  const Dataset d = generate_offline_dataset(EnvKind::PointMass2D, {}, {0.5, 0.5}, 400, data);
  EnsembleTrainConfig cfg;
  cfg.n = 3;
  cfg.epochs = 0;
  cfg.hidden = {16, 16};
  Rng rng(10);
  const EnsembleModel m = train_ensemble(d, cfg, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    Rng init = rng.split(i);
    CHECK(m.members()[i] == Mlp({6, 16, 16, 10}, Activation::Tanh, init));
  }
}

TEST_CASE("train_ensemble: result independent of jobs") {
  Rng data(11);
  const Dataset d = generate_offline_dataset(EnvKind::MassSpringDamper, {}, {0.5, 0.5}, 600, data);
  EnsembleTrainConfig cfg;
  cfg.n = 3;
  cfg.epochs = 2;
  cfg.hidden = {16};
  Rng r1(12), r2(12);
  const EnsembleModel a = train_ensemble(d, cfg, r1);
  cfg.jobs = 3;
  const EnsembleModel b = train_ensemble(d, cfg, r2);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.members()[i] == b.members()[i]);
  CHECK(a.validation_nll == b.validation_nll);
}

TEST_CASE("train_ensemble: validation") {
  Rng data(13);
  const Dataset d = generate_offline_dataset(EnvKind::MassSpringDamper, {}, {0.5, 0.5}, 100, data);
  Rng rng(1);
  EnsembleTrainConfig cfg;
  CHECK_THROWS_AS(train_ensemble(d, cfg, rng), ValidationError);  // 100 < batch 256
  cfg.batch = 32;
  cfg.n = 1;
  CHECK_THROWS_AS(train_ensemble(d, cfg, rng), ValidationError);
  CHECK_THROWS_AS(train_ensemble(Dataset(2, 1), cfg, rng), ValidationError);
  CHECK_THROWS_AS(EnsembleModel({Mlp::zeros({3, 6}, Activation::Tanh)}, NormStats{Vec::Zero(3), Vec::Ones(3)}, 2, 1),
                  ValidationError);
}

TEST_CASE("penalized reward") {
  CHECK(penalized_reward(1.0, 0.5, 1.0) == 0.5);
  CHECK(penalized_reward(1.0, 0.5, 0.0) == 1.0);
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    const double r = rng.normal(), u = rng.uniform(0, 3), l1 = rng.uniform(0, 2), l2 = l1 + rng.uniform(0, 2);
    CHECK(penalized_reward(r, u, l1) >= penalized_reward(r, u, l2));
    CHECK(penalized_reward(r, u, l1) <= r);
  }
  CHECK_THROWS_AS(penalized_reward(1.0, 0.5, -0.1), ValidationError);
  CHECK_THROWS_AS(penalized_reward(1.0, -0.5, 1.0), ValidationError);
}

TEST_CASE("penalty names") {
  CHECK(parse_penalty_kind("max_aleatoric") == PenaltyKind::MaxAleatoric);
  CHECK(parse_penalty_kind("disagreement") == PenaltyKind::Disagreement);
  CHECK_THROWS_AS(parse_penalty_kind("variance"), ValidationError);
}
