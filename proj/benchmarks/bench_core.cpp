#include <augwm/context_adapter.hpp>
#include <augwm/linear_model.hpp>
#include <augwm/mlp.hpp>
#include <augwm/sac.hpp>
#include <augwm/toy_envs.hpp>
#include <augwm/world_model.hpp>

#include <benchmark/benchmark.h>

using namespace augwm;

namespace {

Mat random_mat(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

EnsembleModel small_ensemble() {
  Rng rng(1);
  Dataset d = generate_offline_dataset(EnvKind::MassSpringDamper, {}, {0.5, 0.5}, 2000, rng);
  EnsembleTrainConfig cfg;
  cfg.epochs = 1;
  return train_ensemble(d, cfg, rng);
}

void BM_MlpForward(benchmark::State& state) {
  Rng rng(1);
  const Mlp net({3, 64, 64, 4}, Activation::Tanh, rng);
  const Mat x = random_mat(3, state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(256);

void BM_MlpForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const Mlp net({3, 64, 64, 4}, Activation::Tanh, rng);
  const Mat x = random_mat(3, state.range(0), rng);
  const Mat g = random_mat(4, state.range(0), rng);
  for (auto _ : state) {
    MlpCache cache;
    net.forward(x, cache);
    benchmark::DoNotOptimize(net.backward(cache, g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(256);

void BM_EnsemblePredictMean(benchmark::State& state) {
  const EnsembleModel model = small_ensemble();
  const Vec s = Vec::Constant(2, 0.1);
  const Vec a = Vec::Constant(1, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(predict_mean(model, s, a));
}
BENCHMARK(BM_EnsemblePredictMean);

void BM_EnsembleUncertaintyBatch(benchmark::State& state) {
  const EnsembleModel model = small_ensemble();
  Rng rng(3);
  const Mat s = random_mat(2, 256, rng);
  const Mat a = random_mat(1, 256, rng).cwiseMin(1.0).cwiseMax(-1.0);
  for (auto _ : state) benchmark::DoNotOptimize(uncertainty(model, s, a));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_EnsembleUncertaintyBatch);

void BM_FitLinear(benchmark::State& state) {
  Rng rng(4);
  const Mat s = random_mat(2, state.range(0), rng);
  const Mat d = random_mat(2, state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(fit_linear(s, d, 1e-6));
}
BENCHMARK(BM_FitLinear)->Arg(100);

void BM_AdaptEpisode(benchmark::State& state) {
  const EnsembleModel model = small_ensemble();
  SacConfig sc;
  Rng rng(5);
  const Actor actor(2, 1, 2, sc, rng);
  const ToyEnvironment env(EnvKind::MassSpringDamper, {});
  const AdaptConfig cfg;
  for (auto _ : state) {
    Rng r(6);
    benchmark::DoNotOptimize(adapt_rollout(actor, model, env, kDefaultHorizon, cfg, ContextMode::Learned, r));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kDefaultHorizon));
}
BENCHMARK(BM_AdaptEpisode);

}  // namespace

BENCHMARK_MAIN();
