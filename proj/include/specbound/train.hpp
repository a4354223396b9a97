#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "specbound/dataset.hpp"
#include "specbound/margin.hpp"
#include "specbound/network.hpp"

namespace specbound {

enum class TrainMode { standard, adversarial };

struct TrainConfig {
  std::vector<int> hidden_widths;
  int epochs = 0;
  double learning_rate = 0.1;
  int batch_size = 32;
  TrainMode mode = TrainMode::standard;
  AttackSpec attack;  // adversarial mode; epsilon must be > 0 there
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;   // training objective: clean CE, or CE on attacked
                       // inputs in adversarial mode
  double error = 0.0;  // clean 0-1 training error
  double margin_median = 0.0;
  double phi = 0.0;
  std::vector<std::pair<double, double>> per_layer;  // (spectral, frobenius)
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

// Deterministic He-style Gaussian initialization (entries scaled by
// √(2/fan_in)) for the layer stack [n, hidden…, k].
Network init_network(const TrainConfig& config, int input_dim,
                     int num_classes);

// Minibatch SGD on softmax cross-entropy. Adversarial mode replaces each
// input by a cheap PGD point (10 steps, 1 restart) before the gradient step;
// full-strength attacks are for evaluation only. Deterministic given
// (data, config). Throws numeric_error if the loss diverges.
std::pair<Network, TrainHistory> train(const Dataset& data,
                                       const TrainConfig& config);

// Max relative discrepancy between the analytic and central-difference
// cross-entropy weight gradients, over at most 500 deterministically
// subsampled coordinates. Returns nullopt when some pre-activation sits
// within 1e-3 of a ReLU kink (inconclusive, not a failure).
std::optional<double> finite_diff_gradcheck(const Network& net,
                                            const Vector& x, int y,
                                            double step);

// Softmax cross-entropy −log p_y and its logit gradient p − e_y.
double cross_entropy(const Vector& logits, int y);
Vector cross_entropy_logit_grad(const Vector& logits, int y);

}  // namespace specbound
