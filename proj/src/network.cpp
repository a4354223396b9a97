#include "specbound/network.hpp"

#include <cmath>
#include <sstream>

#include "specbound/errors.hpp"

namespace specbound {

namespace {

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

// Pre-activations of every layer, f¹..f^d.
std::vector<Vector> forward_trace(const Network& net, const Vector& x) {
  std::vector<Vector> pre;
  pre.reserve(net.depth());
  Vector cur = net.layer(0) * x;
  pre.push_back(cur);
  for (int i = 1; i < net.depth(); ++i) {
    Vector next = net.layer(i) * relu(cur);
    if (net.kind() == NetworkKind::resnet) next += cur;
    pre.push_back(next);
    cur = std::move(next);
  }
  return pre;
}

}  // namespace

Network::Network(NetworkKind kind, std::vector<Matrix> layers)
    : kind_(kind), layers_(std::move(layers)) {
  if (layers_.empty()) throw usage_error("Network: needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    std::ostringstream name;
    name << "Network layer " << i + 1;
    check_finite(layers_[i], name.str().c_str());
  }
  if (kind_ == NetworkKind::feedforward) {
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
      if (layers_[i + 1].cols() != layers_[i].rows())
        throw usage_error("Network: layer width mismatch between layers " +
                          std::to_string(i + 1) + " and " +
                          std::to_string(i + 2));
    }
  } else {
    Eigen::Index h = layers_.front().rows();
    for (std::size_t i = 1; i < layers_.size(); ++i) {
      if (layers_[i].rows() != h || layers_[i].cols() != h)
        throw usage_error(
            "Network: resnet layers past the first must be square of width " +
            std::to_string(h));
    }
  }
}

int Network::max_width() const {
  Eigen::Index h = 0;
  for (const auto& w : layers_) h = std::max(h, w.rows());
  return static_cast<int>(h);
}

Vector forward(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim())
    throw usage_error("forward: input dimension mismatch");
  return forward_trace(net, x).back();
}

Matrix forward_batch(const Network& net, const Matrix& x) {
  if (x.rows() != net.input_dim())
    throw usage_error("forward_batch: input dimension mismatch");
  Matrix cur = net.layer(0) * x;
  for (int i = 1; i < net.depth(); ++i) {
    Matrix next = net.layer(i) * relu(cur);
    if (net.kind() == NetworkKind::resnet) next += cur;
    cur = std::move(next);
  }
  return cur;
}

Vector layer_output(const Network& net, const Vector& x, int i) {
  if (i < 1 || i > net.depth())
    throw usage_error("layer_output: layer index out of range");
  if (x.size() != net.input_dim())
    throw usage_error("layer_output: input dimension mismatch");
  return forward_trace(net, x)[i - 1];
}

Vector backprop_input(const Network& net, const Vector& x,
                      const Vector& seed_direction) {
  if (x.size() != net.input_dim())
    throw usage_error("backprop: input dimension mismatch");
  if (seed_direction.size() != net.output_dim())
    throw usage_error("backprop: seed direction dimension mismatch");
  auto pre = forward_trace(net, x);
  Vector g = seed_direction;  // gradient w.r.t. fⁱ, walking i down
  for (int i = net.depth() - 1; i >= 1; --i) {
    Vector mask = (pre[i - 1].array() > 0.0).cast<double>();
    Vector through = (net.layer(i).transpose() * g).cwiseProduct(mask);
    if (net.kind() == NetworkKind::resnet) through += g;
    g = std::move(through);
  }
  return net.layer(0).transpose() * g;
}

LayerPerturbation backprop_weights(const Network& net, const Vector& x,
                                   const Vector& seed_direction) {
  if (x.size() != net.input_dim())
    throw usage_error("backprop: input dimension mismatch");
  if (seed_direction.size() != net.output_dim())
    throw usage_error("backprop: seed direction dimension mismatch");
  auto pre = forward_trace(net, x);
  std::vector<Matrix> grads(net.depth());
  Vector g = seed_direction;
  for (int i = net.depth() - 1; i >= 1; --i) {
    grads[i] = g * relu(pre[i - 1]).transpose();
    Vector mask = (pre[i - 1].array() > 0.0).cast<double>();
    Vector through = (net.layer(i).transpose() * g).cwiseProduct(mask);
    if (net.kind() == NetworkKind::resnet) through += g;
    g = std::move(through);
  }
  grads[0] = g * x.transpose();
  return LayerPerturbation{std::move(grads)};
}

Network perturb(const Network& net, const LayerPerturbation& u) {
  if (static_cast<int>(u.deltas.size()) != net.depth())
    throw usage_error("perturb: layer count mismatch");
  std::vector<Matrix> layers;
  layers.reserve(net.depth());
  for (int i = 0; i < net.depth(); ++i) {
    if (u.deltas[i].rows() != net.layer(i).rows() ||
        u.deltas[i].cols() != net.layer(i).cols())
      throw usage_error("perturb: shape mismatch at layer " +
                        std::to_string(i + 1));
    layers.push_back(net.layer(i) + u.deltas[i]);
  }
  return Network(net.kind(), std::move(layers));
}

Network beta_normalize(const Network& net) {
  if (net.kind() != NetworkKind::feedforward)
    throw usage_error("beta_normalize: only defined for feedforward networks");
  const int d = net.depth();
  std::vector<double> norms(d);
  double log_beta = 0.0;
  for (int i = 0; i < d; ++i) {
    norms[i] = spectral_norm(net.layer(i));
    if (norms[i] == 0.0)
      throw numeric_error("beta_normalize: layer " + std::to_string(i + 1) +
                          " has zero spectral norm");
    log_beta += std::log(norms[i]);
  }
  double beta = std::exp(log_beta / d);
  std::vector<Matrix> layers;
  layers.reserve(d);
  for (int i = 0; i < d; ++i) layers.push_back((beta / norms[i]) * net.layer(i));
  return Network(net.kind(), std::move(layers));
}

}  // namespace specbound
