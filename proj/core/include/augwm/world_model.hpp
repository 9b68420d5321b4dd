#pragma once

#include "augwm/core_types.hpp"
#include "augwm/mlp.hpp"
#include "augwm/rng.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace augwm {

enum class PredictMode { SampleMember, MeanOfMeans };

/// How `uncertainty` scores a state-action pair.
enum class PenaltyKind {
  /// max_i || (delta_std_i, reward_std_i) ||_2
  MaxAleatoric,
  /// max_i || mean_i - mean over members ||_2 of (delta, reward) means
  Disagreement,
};

std::string_view to_string(PenaltyKind k);
PenaltyKind parse_penalty_kind(std::string_view name);

struct ModelPrediction {
  Vec delta_mean;
  Vec delta_std;
  double reward_mean = 0.0;
  double reward_std = 0.0;
  /// Set for SampleMember; empty for MeanOfMeans.
  std::optional<std::size_t> member_index;
};

/// Batched output of one member: rows are (delta..., reward).
struct MemberOutput {
  Mat mean;
  Mat std;
};

/// N probabilistic networks mapping whitened (s, a) to Gaussians over
/// (s' - s, r). Each member's raw output has 2 (S_DIM + 1) rows: means first,
/// then log-stds bounded by GaussianHead.
class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(std::vector<Mlp> members, NormStats norm, std::size_t s_dim, std::size_t a_dim);

  std::size_t size() const { return members_.size(); }
  std::size_t s_dim() const { return s_dim_; }
  std::size_t a_dim() const { return a_dim_; }
  bool empty() const { return members_.empty(); }
  const std::vector<Mlp>& members() const { return members_; }
  const NormStats& norm() const { return norm_; }

  /// Held-out NLL per member from training (empty when unknown).
  std::vector<double> validation_nll;
  /// Free-form description of the training run for checkpoints.
  std::string training_config;

  /// Member i evaluated on a batch (states and actions one column per sample).
  MemberOutput member_output(std::size_t i, const Mat& states, const Mat& actions) const;
  Mat whitened_inputs(const Mat& states, const Mat& actions) const;

 private:
  std::vector<Mlp> members_;
  NormStats norm_;
  std::size_t s_dim_ = 0;
  std::size_t a_dim_ = 0;
};

struct EnsembleTrainConfig {
  std::size_t n = 5;
  std::size_t epochs = 100;
  std::size_t batch = 256;
  double lr = 1e-3;
  std::vector<std::size_t> hidden = {64, 64};
  Activation activation = Activation::Tanh;
  /// Fraction of the (shuffled) dataset held out for validation NLL.
  double holdout_frac = 0.1;
  /// Each member trains on its own bootstrap resample of the training split.
  bool bootstrap = true;
  /// Test mode: every member draws init and minibatches from the same stream.
  bool shared_member_stream = false;
  std::size_t jobs = 1;
};

/// Fits every member by Gaussian NLL on whitened (s, a) -> (s' - s, r).
/// Member i initialises from `rng.split(i)`; members train independently so
/// the result does not depend on `jobs`.
EnsembleModel train_ensemble(const Dataset& d, const EnsembleTrainConfig& cfg, Rng& rng);

ModelPrediction predict(const EnsembleModel& m, const Vec& s, const Vec& a, PredictMode mode, Rng& rng);
/// Average of member means (std fields hold the average member std).
ModelPrediction predict_mean(const EnsembleModel& m, const Vec& s, const Vec& a);

double uncertainty(const EnsembleModel& m, const Vec& s, const Vec& a,
                   PenaltyKind kind = PenaltyKind::MaxAleatoric);
/// Batched variant; one score per column.
Vec uncertainty(const EnsembleModel& m, const Mat& states, const Mat& actions,
                PenaltyKind kind = PenaltyKind::MaxAleatoric);

/// r_hat - lambda * u. Throws ValidationError for negative lambda or u.
double penalized_reward(double r_hat, double u, double lambda);

}  // namespace augwm
