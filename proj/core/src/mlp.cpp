#include "augwm/mlp.hpp"

#include "augwm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace augwm {
namespace {

template <typename Derived>
void activate_inplace(Eigen::MatrixBase<Derived>& m, Activation a) {
  if (a == Activation::Tanh) {
    m = m.array().tanh().matrix();
  } else {
    m = m.cwiseMax(0.0);
  }
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw ValidationError("unknown activation '" + std::string(name) + "'");
}

std::vector<std::span<const double>> MlpGradients::blocks() const {
  std::vector<std::span<const double>> out;
  out.reserve(layers.size() * 2);
  for (const auto& l : layers) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return out;
}

Mlp Mlp::zeros(std::vector<std::size_t> sizes, Activation hidden) {
  Mlp net;
  net.sizes_ = std::move(sizes);
  net.activation_ = hidden;
  net.check_layout();
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(net.sizes_[l]);
    const auto out = static_cast<Eigen::Index>(net.sizes_[l + 1]);
    net.layers_.push_back(DenseLayer{Mat::Zero(out, in), Vec::Zero(out)});
  }
  return net;
}

Mlp::Mlp(std::vector<std::size_t> sizes, Activation hidden, Rng& rng) {
  *this = zeros(std::move(sizes), hidden);
  for (auto& layer : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = rng.uniform(-limit, limit);
  }
}

void Mlp::check_layout() const {
  if (sizes_.size() < 2) throw ValidationError("an MLP needs at least input and output sizes");
  for (auto s : sizes_) {
    if (s == 0) throw ValidationError("layer sizes must be positive");
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Vec Mlp::forward(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim())
    throw ValidationError("MLP input has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(input_dim()));
  Vec h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vec next = layers_[l].weight * h + layers_[l].bias;
    if (l + 1 < layers_.size()) activate_inplace(next, activation_);
    h = std::move(next);
  }
  return h;
}

Mat Mlp::forward(const Mat& x) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim())
    throw ValidationError("MLP input has dimension " + std::to_string(x.rows()) + ", expected " +
                          std::to_string(input_dim()));
  Mat h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Mat next = (layers_[l].weight * h).colwise() + layers_[l].bias;
    if (l + 1 < layers_.size()) activate_inplace(next, activation_);
    h = std::move(next);
  }
  return h;
}

Mat Mlp::forward(const Mat& x, MlpCache& cache) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim())
    throw ValidationError("MLP input has dimension " + std::to_string(x.rows()) + ", expected " +
                          std::to_string(input_dim()));
  cache.activations.clear();
  cache.activations.reserve(layers_.size() + 1);
  cache.activations.push_back(x);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Mat next = (layers_[l].weight * cache.activations.back()).colwise() + layers_[l].bias;
    if (l + 1 < layers_.size()) activate_inplace(next, activation_);
    cache.activations.push_back(std::move(next));
  }
  return cache.activations.back();
}

MlpGradients Mlp::backward(const MlpCache& cache, const Mat& output_grad) const {
  if (cache.activations.size() != layers_.size() + 1)
    throw ValidationError("backward called without a matching forward cache");
  const Mat& out = cache.activations.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols())
    throw ValidationError("output gradient shape does not match the cached forward pass");

  MlpGradients grads;
  grads.layers.resize(layers_.size());
  Mat g = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (l + 1 < layers_.size()) {
      const Mat& h = cache.activations[l + 1];
      if (activation_ == Activation::Tanh) {
        g.array() *= 1.0 - h.array().square();
      } else {
        g.array() *= (h.array() > 0.0).cast<double>();
      }
    }
    grads.layers[l].weight = g * cache.activations[l].transpose();
    grads.layers[l].bias = g.rowwise().sum();
    g = layers_[l].weight.transpose() * g;
  }
  grads.input = std::move(g);
  return grads;
}

std::vector<std::span<double>> Mlp::parameter_blocks() {
  std::vector<std::span<double>> out;
  out.reserve(layers_.size() * 2);
  for (auto& l : layers_) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return out;
}

std::vector<std::span<const double>> Mlp::parameter_blocks() const {
  std::vector<std::span<const double>> out;
  out.reserve(layers_.size() * 2);
  for (const auto& l : layers_) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return out;
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.sizes_ != b.sizes_ || a.activation_ != b.activation_ || a.layers_.size() != b.layers_.size())
    return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].weight != b.layers_[l].weight || a.layers_[l].bias != b.layers_[l].bias) return false;
  }
  return true;
}

void polyak_update(Mlp& target, const Mlp& source, double tau) {
  if (target.sizes() != source.sizes()) throw ValidationError("polyak_update: network shapes differ");
  auto& t = target.layers();
  const auto& s = source.layers();
  for (std::size_t l = 0; l < t.size(); ++l) {
    t[l].weight = (1.0 - tau) * t[l].weight + tau * s[l].weight;
    t[l].bias = (1.0 - tau) * t[l].bias + tau * s[l].bias;
  }
}

AdamState::AdamState(std::span<const std::size_t> block_sizes, AdamConfig cfg) : config(cfg) {
  for (auto n : block_sizes) {
    first_moment.push_back(Vec::Zero(static_cast<Eigen::Index>(n)));
    second_moment.push_back(Vec::Zero(static_cast<Eigen::Index>(n)));
  }
}

AdamState AdamState::for_network(const Mlp& net, AdamConfig cfg) {
  std::vector<std::size_t> sizes;
  for (const auto& b : net.parameter_blocks()) sizes.push_back(b.size());
  return AdamState(sizes, cfg);
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& st) {
  if (params.size() != grads.size() || params.size() != st.first_moment.size())
    throw ValidationError("adam_step: block count mismatch");
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size() ||
        params[b].size() != static_cast<std::size_t>(st.first_moment[b].size()))
      throw ValidationError("adam_step: block " + std::to_string(b) + " shape mismatch");
  }

  ++st.step;
  const auto& c = st.config;
  const double t = static_cast<double>(st.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    Eigen::Map<Vec> p(params[b].data(), static_cast<Eigen::Index>(params[b].size()));
    Eigen::Map<const Vec> g(grads[b].data(), static_cast<Eigen::Index>(grads[b].size()));
    Vec& m = st.first_moment[b];
    Vec& v = st.second_moment[b];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    p.array() -= c.lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + c.eps);
  }
}

void adam_step(Mlp& net, const MlpGradients& grads, AdamState& st) {
  if (grads.layers.size() != net.layers().size()) throw ValidationError("adam_step: layer count mismatch");
  const auto p = net.parameter_blocks();
  const auto g = grads.blocks();
  adam_step(std::span<const std::span<double>>(p), std::span<const std::span<const double>>(g), st);
}

GaussianNll gaussian_nll(const Vec& mean, const Vec& log_std, const Vec& target) {
  if (mean.size() != log_std.size() || mean.size() != target.size())
    throw ValidationError("gaussian_nll: length mismatch");
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const Vec inv_var = (-2.0 * log_std).array().exp();
  const Vec diff = target - mean;
  GaussianNll out;
  out.loss = log_std.sum() + half_log_2pi * static_cast<double>(mean.size()) +
             0.5 * (diff.array().square() * inv_var.array()).sum();
  out.d_mean = -(diff.array() * inv_var.array()).matrix();
  out.d_log_std = (1.0 - diff.array().square() * inv_var.array()).matrix();
  return out;
}

GaussianNllBatch gaussian_nll(const Mat& mean, const Mat& log_std, const Mat& target) {
  if (mean.rows() != log_std.rows() || mean.rows() != target.rows() || mean.cols() != log_std.cols() ||
      mean.cols() != target.cols())
    throw ValidationError("gaussian_nll: shape mismatch");
  if (mean.cols() == 0) throw ValidationError("gaussian_nll: empty batch");
  const double n = static_cast<double>(mean.cols());
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const Mat inv_var = (-2.0 * log_std).array().exp().matrix();
  const Mat diff = target - mean;
  const Mat scaled_sq = (diff.array().square() * inv_var.array()).matrix();

  GaussianNllBatch out;
  out.loss = (log_std.sum() + 0.5 * scaled_sq.sum()) / n + half_log_2pi * static_cast<double>(mean.rows());
  out.d_mean = (-(diff.array() * inv_var.array()) / n).matrix();
  out.d_log_std = ((1.0 - scaled_sq.array()) / n).matrix();
  return out;
}

GaussianHead GaussianHead::from_raw(const Mat& raw) {
  if (raw.rows() % 2 != 0) throw ValidationError("Gaussian head needs an even output width");
  const Eigen::Index k = raw.rows() / 2;
  GaussianHead h;
  h.mean = raw.topRows(k);
  h.log_std = raw.bottomRows(k).unaryExpr([](double r) {
    const double upper = kLogStdMax - softplus(kLogStdMax - r);
    // The lower wall can push the value past kLogStdMax by at most
    // log1p(exp(kLogStdMin - kLogStdMax)); clip that sliver.
    return std::min(kLogStdMax, kLogStdMin + softplus(upper - kLogStdMin));
  });
  return h;
}

Mat GaussianHead::backward(const Mat& raw, const Mat& d_mean, const Mat& d_log_std) {
  const Eigen::Index k = raw.rows() / 2;
  Mat d_raw(raw.rows(), raw.cols());
  d_raw.topRows(k) = d_mean;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double r = raw(k + i, j);
      const double upper = kLogStdMax - softplus(kLogStdMax - r);
      const double slope = sigmoid(kLogStdMax - r) * sigmoid(upper - kLogStdMin);
      const bool clipped = kLogStdMin + softplus(upper - kLogStdMin) > kLogStdMax;
      d_raw(k + i, j) = clipped ? 0.0 : d_log_std(i, j) * slope;
    }
  }
  return d_raw;
}

}  // namespace augwm
