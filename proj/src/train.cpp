#include "specbound/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "specbound/bounds.hpp"
#include "specbound/errors.hpp"
#include "specbound/rng.hpp"

namespace specbound {

double cross_entropy(const Vector& logits, int y) {
  double mx = logits.maxCoeff();
  double lse = mx + std::log((logits.array() - mx).exp().sum());
  return lse - logits[y];
}

Vector cross_entropy_logit_grad(const Vector& logits, int y) {
  double mx = logits.maxCoeff();
  Vector p = (logits.array() - mx).exp();
  p /= p.sum();
  p[y] -= 1.0;
  return p;
}

Network init_network(const TrainConfig& config, int input_dim,
                     int num_classes) {
  std::vector<int> widths;
  widths.push_back(input_dim);
  for (int h : config.hidden_widths) {
    if (h < 1) throw usage_error("init_network: hidden widths must be >= 1");
    widths.push_back(h);
  }
  widths.push_back(num_classes);
  auto gen = rng::stream(config.seed, "init");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    double scale = std::sqrt(2.0 / widths[i]);
    Matrix w(widths[i + 1], widths[i]);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = scale * gauss(gen);
    layers.push_back(std::move(w));
  }
  return Network(NetworkKind::feedforward, std::move(layers));
}

namespace {

EpochRecord evaluate_epoch(const Network& net, const Dataset& data, int epoch,
                           double objective_loss) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.loss = objective_loss;
  std::vector<double> margins;
  margins.reserve(data.size());
  long errors = 0;
  for (int s = 0; s < data.size(); ++s) {
    Vector logits = forward(net, data.xs[s]);
    double mg = margin_label(logits, data.ys[s]);
    margins.push_back(mg);
    if (mg <= 0.0) ++errors;
  }
  rec.error = static_cast<double>(errors) / data.size();
  std::sort(margins.begin(), margins.end());
  std::size_t mid = margins.size() / 2;
  rec.margin_median = margins.size() % 2 == 1
                          ? margins[mid]
                          : 0.5 * (margins[mid - 1] + margins[mid]);
  rec.phi = spectral_complexity(net);
  for (const auto& w : net.layers())
    rec.per_layer.emplace_back(spectral_norm(w), frobenius_norm(w));
  return rec;
}

}  // namespace

std::pair<Network, TrainHistory> train(const Dataset& data,
                                       const TrainConfig& config) {
  validate(data);
  if (config.epochs < 0) throw usage_error("train: epochs must be >= 0");
  if (config.learning_rate <= 0.0)
    throw usage_error("train: learning rate must be > 0");
  if (config.batch_size < 1) throw usage_error("train: batch size must be >= 1");
  if (config.mode == TrainMode::adversarial && config.attack.epsilon <= 0.0)
    throw usage_error("train: adversarial mode needs attack.epsilon > 0");

  Network net = init_network(config, data.input_dim, data.num_classes);
  TrainHistory history;
  if (config.epochs == 0) return {net, history};

  std::vector<Matrix> weights(net.layers());
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto shuffle_gen =
        rng::stream(config.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_gen);

    double objective_sum = 0.0;
    Network cur(NetworkKind::feedforward, weights);
    for (int base = 0; base < data.size(); base += config.batch_size) {
      int count = std::min(config.batch_size, data.size() - base);
      std::vector<Matrix> grad;
      for (const auto& w : weights) grad.push_back(Matrix::Zero(w.rows(), w.cols()));

      for (int b = 0; b < count; ++b) {
        int s = order[base + b];
        Vector x = data.xs[s];
        if (config.mode == TrainMode::adversarial) {
          AttackSpec cheap = config.attack;
          cheap.steps = 10;
          cheap.restarts = 1;
          cheap.step_size = 2.5 * cheap.epsilon / cheap.steps;
          cheap.seed = rng::splitmix64(
              rng::splitmix64(config.seed ^ rng::hash_tag("train-attack")) ^
              (static_cast<std::uint64_t>(epoch) << 32 ^ s));
          x = pgd_minimize_margin(cur, x, MarginObjective::label(data.ys[s]),
                                  cheap)
                  .witness;
        }
        Vector logits = forward(cur, x);
        objective_sum += cross_entropy(logits, data.ys[s]);
        LayerPerturbation g = backprop_weights(
            cur, x, cross_entropy_logit_grad(logits, data.ys[s]));
        for (std::size_t l = 0; l < grad.size(); ++l) grad[l] += g.deltas[l];
      }
      for (std::size_t l = 0; l < weights.size(); ++l)
        weights[l] -= (config.learning_rate / count) * grad[l];
      cur = Network(NetworkKind::feedforward, weights);
    }

    double objective = objective_sum / data.size();
    if (!std::isfinite(objective))
      throw numeric_error("train: loss diverged at epoch " +
                          std::to_string(epoch));
    history.epochs.push_back(evaluate_epoch(cur, data, epoch, objective));
    net = cur;
  }
  return {net, history};
}

std::optional<double> finite_diff_gradcheck(const Network& net,
                                            const Vector& x, int y,
                                            double step) {
  if (step <= 0.0) throw usage_error("finite_diff_gradcheck: step must be > 0");
  // kink proximity makes central differences unreliable
  for (int i = 1; i < net.depth(); ++i)
    if (layer_output(net, x, i).cwiseAbs().minCoeff() < 1e-3)
      return std::nullopt;

  Vector logits = forward(net, x);
  LayerPerturbation analytic =
      backprop_weights(net, x, cross_entropy_logit_grad(logits, y));

  long total = 0;
  for (const auto& w : net.layers()) total += w.size();
  std::vector<long> coords(total);
  std::iota(coords.begin(), coords.end(), 0);
  if (total > 500) {
    auto gen = rng::stream(0, "gradcheck-subsample", total);
    std::shuffle(coords.begin(), coords.end(), gen);
    coords.resize(500);
  }

  double worst = 0.0;
  for (long flat : coords) {
    long rem = flat;
    std::size_t layer = 0;
    while (rem >= net.layer(static_cast<int>(layer)).size()) {
      rem -= net.layer(static_cast<int>(layer)).size();
      ++layer;
    }
    std::vector<Matrix> wp(net.layers()), wm(net.layers());
    wp[layer].data()[rem] += step;
    wm[layer].data()[rem] -= step;
    double lp = cross_entropy(
        forward(Network(net.kind(), wp), x), y);
    double lm = cross_entropy(
        forward(Network(net.kind(), wm), x), y);
    double numeric = (lp - lm) / (2.0 * step);
    double exact = analytic.deltas[layer].data()[rem];
    double denom = std::max({std::abs(numeric), std::abs(exact), 1e-8});
    worst = std::max(worst, std::abs(numeric - exact) / denom);
  }
  return worst;
}

}  // namespace specbound
