#include <augwm/errors.hpp>
#include <augwm/replay_buffer.hpp>
#include <augwm/toy_envs.hpp>
#include <augwm/trainer.hpp>

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace augwm;

namespace {

struct Fixture {
  Dataset data{2, 1};
  EnsembleModel model;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    Rng rng(1);
    out.data = generate_offline_dataset(EnvKind::MassSpringDamper, {}, {0.5, 0.5}, 5000, rng);
    EnsembleTrainConfig m;
    m.n = 3;
    m.epochs = 40;
    m.hidden = {32, 32};
    Rng mrng(2);
    out.model = train_ensemble(out.data, m, mrng);
    return out;
  }();
  return f;
}

TrainConfig small_config() {
  TrainConfig c;
  c.rollout_batch = 64;
  c.batch = 64;
  c.epochs = 3;
  c.sac.hidden = {32, 32};
  c.model.n = 2;
  c.model.epochs = 2;
  c.model.hidden = {16};
  return c;
}

bool all_finite(const Transition& t) {
  return t.state.allFinite() && t.next_state.allFinite() && t.action.allFinite() && std::isfinite(t.reward);
}

bool same_buffers(const ReplayBuffer& a, const ReplayBuffer& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("replay buffer: FIFO ring") {
  ReplayBuffer buf(3);
  CHECK_THROWS_AS(ReplayBuffer(0), ValidationError);
  for (int i = 0; i < 5; ++i) buf.push(Transition{Vec::Constant(1, i), Vec::Zero(1), double(i), Vec::Zero(1), false});
  CHECK(buf.size() == 3);
  CHECK(buf.capacity() == 3);
  CHECK(buf.cursor() == 2);
  // Slots 0 and 1 were overwritten by items 3 and 4.
  CHECK(buf[0].reward == 3.0);
  CHECK(buf[1].reward == 4.0);
  CHECK(buf[2].reward == 2.0);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto mutate) {
    TrainConfig t;
    mutate(t);
    CHECK_THROWS_AS(t.validate(), ValidationError);
  };
  bad([](TrainConfig& t) { t.h = 0; });
  bad([](TrainConfig& t) { t.rollout_batch = 0; });
  bad([](TrainConfig& t) { t.real_data_frac = 1.5; });
  bad([](TrainConfig& t) { t.lambda = -1; });
  bad([](TrainConfig& t) { t.sac.tau = 0; });
  bad([](TrainConfig& t) { t.sac.gamma = 1; });
  bad([](TrainConfig& t) { t.aug_range = {1.5, 0.5}; });
  bad([](TrainConfig& t) { t.model.n = 1; });
}

TEST_CASE("rollout_batch: counts, determinism and parallel independence") {
  const Fixture& f = fixture();
  TrainConfig cfg;
  cfg.rollout_batch = 4;
  cfg.h = 5;
  Rng arng(3);
  const Actor actor(2, 1, 0, cfg.sac, arng);
  ReplayBuffer buf(1000);
  Rng rng(4);
  const RolloutStats st = rollout_batch(f.model, actor, f.data, cfg, buf, rng);
  CHECK(st.added == 20);
  CHECK(buf.size() == 20);

  cfg.rollout_batch = 100;
  ReplayBuffer a(10000), b(10000), c(10000);
  Rng r1(5), r2(5), r3(5);
  rollout_batch(f.model, actor, f.data, cfg, a, r1);
  rollout_batch(f.model, actor, f.data, cfg, b, r2);
  cfg.jobs = 3;
  rollout_batch(f.model, actor, f.data, cfg, c, r3);
  CHECK(same_buffers(a, b));
  CHECK(same_buffers(a, c));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK_FALSE(a[i].done);

  CHECK_THROWS_AS(rollout_batch(EnsembleModel{}, actor, f.data, cfg, a, r1), ValidationError);
  cfg.use_context = true;
  CHECK_THROWS_AS(rollout_batch(f.model, actor, f.data, cfg, a, r1), ValidationError);
}

TEST_CASE("rollout_batch: penalty is exactly lambda times the uncertainty") {
  const Fixture& f = fixture();
  TrainConfig cfg;
  cfg.rollout_batch = 40;
  Rng arng(6);
  const Actor actor(2, 1, 0, cfg.sac, arng);
  ReplayBuffer raw(1000), pen(1000);
  Rng r1(7), r2(7);
  cfg.lambda = 0.0;
  rollout_batch(f.model, actor, f.data, cfg, raw, r1);
  cfg.lambda = 1.0;
  rollout_batch(f.model, actor, f.data, cfg, pen, r2);
  REQUIRE(raw.size() == pen.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(raw[i].state == pen[i].state);
    CHECK(raw[i].next_state == pen[i].next_state);
    const double u = uncertainty(f.model, raw[i].state, raw[i].action);
    CHECK(pen[i].reward == doctest::Approx(raw[i].reward - u).epsilon(1e-12));
  }
}

TEST_CASE("rollout_batch: non-finite model output cuts the branch") {
  const Fixture& f = fixture();
  std::vector<Mlp> members = f.model.members();
  members[1].layers().back().bias[0] = std::numeric_limits<double>::quiet_NaN();
  const EnsembleModel broken(members, f.model.norm(), 2, 1);
  TrainConfig cfg;
  cfg.rollout_batch = 64;
  cfg.penalty = PenaltyKind::Disagreement;
  Rng arng(8);
  const Actor actor(2, 1, 0, cfg.sac, arng);
  ReplayBuffer buf(1000);
  Rng rng(9);
  const RolloutStats st = rollout_batch(broken, actor, f.data, cfg, buf, rng);
  CHECK(st.nonfinite > 0);
  CHECK(st.added < 64 * 5);
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(all_finite(buf[i]));
}

TEST_CASE("sample_training_batch: mix, contexts and augmentation") {
  const Fixture& f = fixture();
  ReplayBuffer buf(100);
  // Buffer tuples are recognisable by their reward.
  for (int i = 0; i < 100; ++i) buf.push(Transition{Vec::Constant(2, 0.5), Vec::Zero(1), 1000.0, Vec::Constant(2, 0.75), false});
  TrainConfig cfg;
  cfg.batch = 200;
  cfg.real_data_frac = 0.05;
  cfg.use_context = true;
  Rng rng(10);

  cfg.aug = AugKind::None;
  const SacBatch plain = sample_training_batch(f.data, buf, cfg, rng);
  int from_buffer = 0;
  for (Eigen::Index j = 0; j < 200; ++j) from_buffer += plain.rewards[j] == 1000.0;
  CHECK(from_buffer == 190);
  CHECK(plain.contexts == Mat::Ones(2, 200));

  cfg.aug = AugKind::DAS;
  const SacBatch aug = sample_training_batch(f.data, buf, cfg, rng);
  CHECK(aug.contexts == aug.next_contexts);
  CHECK(aug.contexts.minCoeff() >= 0.5);
  CHECK(aug.contexts.maxCoeff() <= 1.5);
  for (Eigen::Index j = 10; j < 200; ++j) {
    const Vec expect = Vec::Constant(2, 0.5) + aug.contexts.col(j).cwiseProduct(Vec::Constant(2, 0.25));
    CHECK((aug.next_states.col(j) - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
  // The buffer itself is never augmented.
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf[i].next_state == Vec::Constant(2, 0.75));

  cfg.use_context = false;
  CHECK(sample_training_batch(f.data, buf, cfg, rng).contexts.rows() == 0);
}

TEST_CASE("train: zero epochs returns the initial policy and a trained model") {
  const Fixture& f = fixture();
  TrainConfig cfg = small_config();
  cfg.epochs = 0;
  Rng rng(11);
  const TrainResult r = train(f.data, cfg, rng);
  CHECK(r.metrics.empty());
  CHECK(r.model.size() == 2);
  Rng actor_rng = rng.split(8).split(1);
  CHECK(r.actor.net == Actor(2, 1, 0, cfg.sac, actor_rng).net);
}

TEST_CASE("train: reproducible and independent of jobs") {
  const Fixture& f = fixture();
  TrainConfig cfg = small_config();
  cfg.aug = AugKind::DAS;
  cfg.use_context = true;
  Rng r1(12), r2(12), r3(12);
  const TrainResult a = train(f.data, cfg, r1);
  const TrainResult b = train(f.data, cfg, r2);
  cfg.jobs = 2;
  const TrainResult c = train(f.data, cfg, r3);
  REQUIRE(a.metrics.size() == 3);
  for (const TrainResult* other : {&b, &c}) {
    CHECK(a.actor.net == other->actor.net);
    CHECK(a.critics.q1 == other->critics.q1);
    for (std::size_t e = 0; e < 3; ++e) {
      CHECK(a.metrics[e].mean_model_return == other->metrics[e].mean_model_return);
      CHECK(a.metrics[e].critic_loss == other->metrics[e].critic_loss);
      CHECK(a.metrics[e].actor_loss == other->metrics[e].actor_loss);
      CHECK(a.metrics[e].buffer_size == other->metrics[e].buffer_size);
    }
  }
  CHECK(a.metrics[0].epoch == 1);
  CHECK(a.metrics[2].buffer_size == 3 * 64 * 5);
}

TEST_CASE("train_policy: callback per epoch and divergence detection") {
  const Fixture& f = fixture();
  TrainConfig cfg = small_config();
  std::size_t calls = 0;
  Rng rng(13);
  train_policy(f.model, f.data, cfg, rng, [&](const EpochMetrics& m, const Actor&, const Critics&) {
    ++calls;
    CHECK(m.epoch == calls);
  });
  CHECK(calls == 3);

  Dataset huge(2, 1);
  for (const auto& t : f.data.transitions()) {
    Transition u = t;
    u.reward = 1e300;
    huge.add(u);
  }
  cfg.real_data_frac = 1.0;
  std::size_t good = 0;
  Rng rng2(14);
  CHECK_THROWS_AS(train_policy(f.model, huge, cfg, rng2, [&](const EpochMetrics&, const Actor&, const Critics&) { ++good; }),
                  TrainingDiverged);
  CHECK(good == 0);
}

TEST_CASE("train_policy: the policy improves inside the model") {
  // Epoch-0 (initial) and final policies are scored on the same start states
  // and model noise, so the comparison is not swamped by start-state spread.
  const Fixture& f = fixture();
  TrainConfig cfg;
  cfg.epochs = 60;
  Rng rng(15);
  const PolicyTrainResult r = train_policy(f.model, f.data, cfg, rng);
  TrainConfig zero = cfg;
  zero.epochs = 0;
  Rng rng0(15);
  const PolicyTrainResult init = train_policy(f.model, f.data, zero, rng0);

  TrainConfig score = cfg;
  score.rollout_batch = 1024;
  ReplayBuffer b0(1 << 14), b1(1 << 14);
  Rng s0(99), s1(99);
  const double before = rollout_batch(f.model, init.actor, f.data, score, b0, s0).mean_return;
  const double after = rollout_batch(f.model, r.actor, f.data, score, b1, s1).mean_return;
  MESSAGE("mean model return: epoch 0 " << before << ", epoch 60 " << after);
  CHECK(after > before);
}

TEST_CASE("train_policy: context-trained policy reads its context") {
  const Fixture& f = fixture();
  TrainConfig cfg = small_config();
  cfg.epochs = 10;
  cfg.aug = AugKind::DAS;
  cfg.use_context = true;
  Rng rng(16);
  const PolicyTrainResult r = train_policy(f.model, f.data, cfg, rng);
  Rng arng(17);
  const Vec s = Vec::Constant(2, 0.2);
  const Vec a1 = act(r.actor, s, ContextVector(Vec::Constant(2, 0.6)), ActMode::Deterministic, arng);
  const Vec a2 = act(r.actor, s, ContextVector(Vec::Constant(2, 1.4)), ActMode::Deterministic, arng);
  CHECK(a1 != a2);
}
