#pragma once

#include "augwm/core_types.hpp"
#include "augwm/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace augwm {

enum class Activation { Tanh, Relu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// Affine layer y = W x + b with W stored (out x in).
struct DenseLayer {
  Mat weight;
  Vec bias;
};

/// Intermediates of a batched forward pass. `activations[0]` is the input,
/// `activations[l + 1]` the output of layer l (post-activation for hidden
/// layers, linear for the last).
struct MlpCache {
  std::vector<Mat> activations;
};

struct MlpGradients {
  std::vector<DenseLayer> layers;
  /// d loss / d input, one column per sample.
  Mat input;

  std::vector<std::span<const double>> blocks() const;
};

/// Fully connected network with a fixed hidden activation and linear output.
/// Batched calls take one sample per column.
class Mlp {
 public:
  Mlp() = default;
  /// Glorot-uniform weights, zero biases.
  Mlp(std::vector<std::size_t> sizes, Activation hidden, Rng& rng);
  static Mlp zeros(std::vector<std::size_t> sizes, Activation hidden);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Vec forward(const Vec& x) const;
  Mat forward(const Mat& x) const;
  Mat forward(const Mat& x, MlpCache& cache) const;

  /// Reverse-mode gradients of a scalar loss given d loss / d output.
  MlpGradients backward(const MlpCache& cache, const Mat& output_grad) const;

  /// Weight and bias blocks in layer order (W0, b0, W1, b1, ...).
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;

  bool all_finite() const;
  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  void check_layout() const;

  std::vector<std::size_t> sizes_;
  Activation activation_ = Activation::Tanh;
  std::vector<DenseLayer> layers_;
};

/// Polyak update: target <- (1 - tau) * target + tau * source.
void polyak_update(Mlp& target, const Mlp& source, double tau);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Vec> first_moment;
  std::vector<Vec> second_moment;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(std::span<const std::size_t> block_sizes, AdamConfig cfg);
  static AdamState for_network(const Mlp& net, AdamConfig cfg);
};

/// Bias-corrected Adam update over matching parameter/gradient blocks.
/// Throws ValidationError on any shape mismatch.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& st);
void adam_step(Mlp& net, const MlpGradients& grads, AdamState& st);

struct GaussianNll {
  double loss = 0.0;
  Vec d_mean;
  Vec d_log_std;
};

/// Sum over components of log_std + 0.5 ln(2 pi) + 0.5 ((target - mean) / exp(log_std))^2
/// with analytic gradients.
GaussianNll gaussian_nll(const Vec& mean, const Vec& log_std, const Vec& target);

struct GaussianNllBatch {
  double loss = 0.0;  ///< mean over columns
  Mat d_mean;         ///< already divided by the batch size
  Mat d_log_std;
};
GaussianNllBatch gaussian_nll(const Mat& mean, const Mat& log_std, const Mat& target);

/// Splits a raw network output of 2k rows into a mean and a log-std whose
/// values are smoothly bounded to [kLogStdMin, kLogStdMax] (softplus walls),
/// keeping gradients alive near the bounds.
struct GaussianHead {
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;

  Mat mean;
  Mat log_std;

  static GaussianHead from_raw(const Mat& raw);
  /// d loss / d raw given gradients with respect to mean and log_std.
  static Mat backward(const Mat& raw, const Mat& d_mean, const Mat& d_log_std);
};

}  // namespace augwm
