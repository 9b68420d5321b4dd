#pragma once

#include <augwm/mlp.hpp>
#include <augwm/rng.hpp>

#include <algorithm>
#include <cmath>

namespace augwm::testing {

inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/// Max relative error between backward() and central differences (step h) of
/// L = sum(probe .* net(x)) over every parameter and every input entry.
inline double mlp_gradient_error(Mlp& net, const Mat& x, const Mat& probe, double h = 1e-5) {
  const auto loss = [&](const Mlp& n, const Mat& in) { return (n.forward(in).array() * probe.array()).sum(); };
  MlpCache cache;
  net.forward(x, cache);
  const MlpGradients g = net.backward(cache, probe);
  double worst = 0.0;

  auto params = net.parameter_blocks();
  const auto grads = g.blocks();
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double keep = params[b][i];
      params[b][i] = keep + h;
      const double up = loss(net, x);
      params[b][i] = keep - h;
      const double down = loss(net, x);
      params[b][i] = keep;
      worst = std::max(worst, rel_error(grads[b][i], (up - down) / (2 * h)));
    }
  }
  Mat xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = xp.data()[i];
    xp.data()[i] = keep + h;
    const double up = loss(net, xp);
    xp.data()[i] = keep - h;
    const double down = loss(net, xp);
    xp.data()[i] = keep;
    worst = std::max(worst, rel_error(g.input.data()[i], (up - down) / (2 * h)));
  }
  return worst;
}

/// Random net with 1-3 layers of at most 32 units, random activation.
inline Mlp random_mlp(Rng& rng) {
  std::vector<std::size_t> sizes{1 + rng.index(6)};
  const std::size_t layers = 1 + rng.index(3);
  for (std::size_t l = 0; l + 1 < layers; ++l) sizes.push_back(1 + rng.index(32));
  sizes.push_back(1 + rng.index(4));
  Mlp net(sizes, rng.uniform() < 0.5 ? Activation::Tanh : Activation::Relu, rng);
  // Non-zero biases so every parameter block is exercised away from zero.
  for (auto& l : net.layers())
    for (auto& b : l.bias) b = rng.uniform(-0.5, 0.5);
  return net;
}

}  // namespace augwm::testing
