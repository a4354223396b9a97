#pragma once

#include <vector>

#include "specbound/linalg.hpp"

namespace specbound {

enum class NetworkKind { feedforward, resnet };

// ReLU network without biases. Feedforward:
//   f(x) = W_d φ(W_{d-1} φ(... φ(W_1 x)))
// ResNet (illustrative recursion, residual additions from layer 2 on, which
// requires all layers past the first to be square of the same width):
//   f¹ = W_1 x,  fⁱ = W_i φ(fⁱ⁻¹) + fⁱ⁻¹
// Instances are immutable values; perturb/beta_normalize return copies.
class Network {
 public:
  Network(NetworkKind kind, std::vector<Matrix> layers);

  NetworkKind kind() const { return kind_; }
  int depth() const { return static_cast<int>(layers_.size()); }
  int input_dim() const { return static_cast<int>(layers_.front().cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().rows()); }
  // h: max layer output width.
  int max_width() const;
  const Matrix& layer(int i) const { return layers_[i]; }
  const std::vector<Matrix>& layers() const { return layers_; }

 private:
  NetworkKind kind_;
  std::vector<Matrix> layers_;
};

// Shape-matched additive weight perturbation [U_1..U_d].
struct LayerPerturbation {
  std::vector<Matrix> deltas;
};

enum class GradTarget { input, weights };

Vector forward(const Network& net, const Vector& x);

// Forward pass over a batch of inputs stored as columns of x.
Matrix forward_batch(const Network& net, const Matrix& x);

// Pre-activation output of layer i (1-based); i = d equals forward().
Vector layer_output(const Network& net, const Vector& x, int i);

// Gradient of seed_direction · f_w(x) with respect to x. ReLU subgradient at
// 0 is taken as 0.
Vector backprop_input(const Network& net, const Vector& x,
                      const Vector& seed_direction);

// Gradient of seed_direction · f_w(x) with respect to every W_i.
LayerPerturbation backprop_weights(const Network& net, const Vector& x,
                                   const Vector& seed_direction);

Network perturb(const Network& net, const LayerPerturbation& u);

// Rescales every layer to W̃_i = (β/‖W_i‖₂) W_i with β = (∏‖W_i‖₂)^{1/d}.
// ReLU homogeneity keeps the forward map unchanged. Feedforward only.
Network beta_normalize(const Network& net);

}  // namespace specbound
