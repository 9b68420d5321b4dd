#include "augwm/world_model.hpp"

#include "augwm/errors.hpp"
#include "augwm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

namespace augwm {
namespace {

struct TrainingArrays {
  Mat inputs;   // whitened (s, a), one column per transition
  Mat targets;  // (s' - s, r)
};

TrainingArrays build_arrays(const Dataset& d, const NormStats& norm) {
  const auto s = static_cast<Eigen::Index>(d.s_dim());
  const auto a = static_cast<Eigen::Index>(d.a_dim());
  const auto n = static_cast<Eigen::Index>(d.size());
  TrainingArrays arr{Mat(s + a, n), Mat(s + 1, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = d[static_cast<std::size_t>(j)];
    arr.inputs.col(j).head(s) = t.state;
    arr.inputs.col(j).tail(a) = t.action;
    arr.targets.col(j).head(s) = t.next_state - t.state;
    arr.targets(s, j) = t.reward;
  }
  arr.inputs = norm.whiten(arr.inputs);
  return arr;
}

Mat gather(const Mat& m, std::span<const std::size_t> idx) {
  Mat out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(idx[j]));
  return out;
}

double member_nll(const Mlp& net, const Mat& inputs, const Mat& targets) {
  const Mat raw = net.forward(inputs);
  const GaussianHead head = GaussianHead::from_raw(raw);
  return gaussian_nll(head.mean, head.log_std, targets).loss;
}

Mlp train_member(const TrainingArrays& arr, std::span<const std::size_t> train_idx,
                 const EnsembleTrainConfig& cfg, Rng rng, std::size_t s_dim, std::size_t a_dim) {
  std::vector<std::size_t> sizes{s_dim + a_dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(2 * (s_dim + 1));
  Mlp net(sizes, cfg.activation, rng);
  AdamState adam = AdamState::for_network(net, AdamConfig{.lr = cfg.lr});

  std::vector<std::size_t> pool(train_idx.begin(), train_idx.end());
  if (cfg.bootstrap) {
    for (auto& p : pool) p = train_idx[rng.index(train_idx.size())];
  }

  MlpCache cache;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t start = 0; start < pool.size(); start += cfg.batch) {
      const std::size_t len = std::min(cfg.batch, pool.size() - start);
      const std::span<const std::size_t> idx(pool.data() + start, len);
      const Mat x = gather(arr.inputs, idx);
      const Mat y = gather(arr.targets, idx);
      const Mat raw = net.forward(x, cache);
      const GaussianHead head = GaussianHead::from_raw(raw);
      const GaussianNllBatch nll = gaussian_nll(head.mean, head.log_std, y);
      const Mat d_raw = GaussianHead::backward(raw, nll.d_mean, nll.d_log_std);
      adam_step(net, net.backward(cache, d_raw), adam);
    }
  }
  return net;
}

}  // namespace

std::string_view to_string(PenaltyKind k) {
  return k == PenaltyKind::MaxAleatoric ? "max_aleatoric" : "disagreement";
}

PenaltyKind parse_penalty_kind(std::string_view name) {
  if (name == "max_aleatoric") return PenaltyKind::MaxAleatoric;
  if (name == "disagreement") return PenaltyKind::Disagreement;
  throw ValidationError("unknown penalty kind '" + std::string(name) + "'");
}

EnsembleModel::EnsembleModel(std::vector<Mlp> members, NormStats norm, std::size_t s_dim, std::size_t a_dim)
    : members_(std::move(members)), norm_(std::move(norm)), s_dim_(s_dim), a_dim_(a_dim) {
  if (members_.size() < 2) throw ValidationError("an ensemble needs at least two members");
  for (const auto& m : members_) {
    if (m.input_dim() != s_dim + a_dim || m.output_dim() != 2 * (s_dim + 1))
      throw ValidationError("ensemble member has inconsistent dimensions");
  }
  if (static_cast<std::size_t>(norm_.mean.size()) != s_dim + a_dim ||
      static_cast<std::size_t>(norm_.std.size()) != s_dim + a_dim)
    throw ValidationError("normalisation statistics have the wrong dimension");
}

Mat EnsembleModel::whitened_inputs(const Mat& states, const Mat& actions) const {
  if (static_cast<std::size_t>(states.rows()) != s_dim_ || static_cast<std::size_t>(actions.rows()) != a_dim_ ||
      states.cols() != actions.cols())
    throw ValidationError("ensemble input has the wrong shape");
  Mat x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return norm_.whiten(x);
}

MemberOutput EnsembleModel::member_output(std::size_t i, const Mat& states, const Mat& actions) const {
  const GaussianHead head = GaussianHead::from_raw(members_.at(i).forward(whitened_inputs(states, actions)));
  return MemberOutput{head.mean, head.log_std.array().exp().matrix()};
}

EnsembleModel train_ensemble(const Dataset& d, const EnsembleTrainConfig& cfg, Rng& rng) {
  if (d.empty()) throw ValidationError("train_ensemble: empty dataset");
  if (cfg.n < 2) throw ValidationError("train_ensemble: ensemble size must be at least 2");
  if (cfg.batch == 0) throw ValidationError("train_ensemble: batch must be positive");
  if (d.size() < cfg.batch) throw ValidationError("train_ensemble: dataset smaller than batch");
  if (!(cfg.holdout_frac >= 0.0 && cfg.holdout_frac < 1.0))
    throw ValidationError("train_ensemble: holdout_frac must lie in [0, 1)");

  const NormStats norm = compute_norm_stats(d);
  const TrainingArrays arr = build_arrays(d, norm);

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng = rng.split(0xffff);
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto holdout = static_cast<std::size_t>(cfg.holdout_frac * static_cast<double>(d.size()));
  const std::span<const std::size_t> valid_idx(order.data(), holdout);
  const std::span<const std::size_t> train_idx(order.data() + holdout, order.size() - holdout);
  if (train_idx.empty()) throw ValidationError("train_ensemble: no training data after holdout");

  std::vector<Mlp> members(cfg.n);
  parallel_for(cfg.n, cfg.jobs, [&](std::size_t i) {
    members[i] = train_member(arr, train_idx, cfg, rng.split(cfg.shared_member_stream ? 0 : i), d.s_dim(),
                              d.a_dim());
  });

  EnsembleModel model(std::move(members), norm, d.s_dim(), d.a_dim());
  if (!valid_idx.empty()) {
    const Mat vx = gather(arr.inputs, valid_idx);
    const Mat vy = gather(arr.targets, valid_idx);
    for (const auto& m : model.members()) model.validation_nll.push_back(member_nll(m, vx, vy));
  }
  return model;
}

ModelPrediction predict(const EnsembleModel& m, const Vec& s, const Vec& a, PredictMode mode, Rng& rng) {
  if (mode == PredictMode::MeanOfMeans) return predict_mean(m, s, a);
  if (m.empty()) throw ValidationError("predict: untrained ensemble");
  const std::size_t i = rng.index(m.size());
  const MemberOutput out = m.member_output(i, s, a);
  const auto sd = static_cast<Eigen::Index>(m.s_dim());
  ModelPrediction p;
  p.delta_mean = out.mean.col(0).head(sd);
  p.delta_std = out.std.col(0).head(sd);
  p.reward_mean = out.mean(sd, 0);
  p.reward_std = out.std(sd, 0);
  p.member_index = i;
  return p;
}

ModelPrediction predict_mean(const EnsembleModel& m, const Vec& s, const Vec& a) {
  if (m.empty()) throw ValidationError("predict: untrained ensemble");
  const auto sd = static_cast<Eigen::Index>(m.s_dim());
  Vec mean = Vec::Zero(sd + 1);
  Vec std = Vec::Zero(sd + 1);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const MemberOutput out = m.member_output(i, s, a);
    mean += out.mean.col(0);
    std += out.std.col(0);
  }
  mean /= static_cast<double>(m.size());
  std /= static_cast<double>(m.size());
  ModelPrediction p;
  p.delta_mean = mean.head(sd);
  p.delta_std = std.head(sd);
  p.reward_mean = mean[sd];
  p.reward_std = std[sd];
  return p;
}

Vec uncertainty(const EnsembleModel& m, const Mat& states, const Mat& actions, PenaltyKind kind) {
  if (m.empty()) throw ValidationError("uncertainty: untrained ensemble");
  const Eigen::Index n = states.cols();
  Vec u = Vec::Zero(n);
  if (kind == PenaltyKind::MaxAleatoric) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const MemberOutput out = m.member_output(i, states, actions);
      u = u.cwiseMax(out.std.colwise().norm().transpose());
    }
    return u;
  }
  std::vector<Mat> means;
  Mat avg = Mat::Zero(static_cast<Eigen::Index>(m.s_dim() + 1), n);
  for (std::size_t i = 0; i < m.size(); ++i) {
    means.push_back(m.member_output(i, states, actions).mean);
    avg += means.back();
  }
  avg /= static_cast<double>(m.size());
  for (const auto& mi : means) u = u.cwiseMax((mi - avg).colwise().norm().transpose());
  return u;
}

double uncertainty(const EnsembleModel& m, const Vec& s, const Vec& a, PenaltyKind kind) {
  return uncertainty(m, Mat(s), Mat(a), kind)[0];
}

double penalized_reward(double r_hat, double u, double lambda) {
  if (!(lambda >= 0.0)) throw ValidationError("penalty coefficient must be non-negative");
  if (!(u >= 0.0)) throw ValidationError("uncertainty must be non-negative");
  return r_hat - lambda * u;
}

}  // namespace augwm
