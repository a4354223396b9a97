#include "specbound/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specbound/bounds.hpp"
#include "specbound/errors.hpp"
#include "specbound/rng.hpp"

namespace specbound {

namespace {

constexpr double kPassSlack = 1e-12;
constexpr double kTwoE = 2.0 * 2.718281828459045235360287;

double effective_norm(const Network& net, int layer) {
  double s = spectral_norm(net.layer(layer));
  return net.kind() == NetworkKind::resnet ? s + 1.0 : s;
}

TrialReport make_trial(long id, double measured, double bound,
                       double oracle_err) {
  TrialReport t;
  t.trial_id = id;
  t.measured_gap = measured;
  t.bound_value = bound;
  t.oracle_error_bound = oracle_err;
  t.slack_ratio = measured > 0.0 ? bound / measured
                                 : std::numeric_limits<double>::infinity();
  t.pass = measured <= bound + oracle_err + kPassSlack;
  t.inconclusive = t.pass && measured > bound;
  return t;
}

void accumulate(SuiteSummary& s, const TrialReport& t) {
  ++s.trials;
  if (!t.pass) ++s.violations;
  if (t.inconclusive) ++s.inconclusive;
  if (s.trials == 1 || t.slack_ratio < s.min_slack) s.min_slack = t.slack_ratio;
  int bucket = std::isinf(t.slack_ratio)
                   ? 99
                   : static_cast<int>(std::floor(std::log10(
                         std::max(t.slack_ratio, 1e-300))));
  ++s.slack_histogram[std::min(bucket, 99)];
}

Matrix random_matrix(std::mt19937_64& gen, int rows, int cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = gauss(gen);
  return m;
}

Vector random_vector(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(gen);
  return v;
}

Network random_feedforward(std::mt19937_64& gen, int max_depth, int max_width,
                           int max_inputs) {
  std::uniform_int_distribution<int> depth_dist(1, max_depth);
  std::uniform_int_distribution<int> width_dist(2, max_width);
  int d = depth_dist(gen);
  std::vector<int> widths(d + 1);
  widths[0] = std::uniform_int_distribution<int>(1, max_inputs)(gen);
  for (int i = 1; i <= d; ++i) widths[i] = width_dist(gen);
  std::vector<Matrix> layers;
  for (int i = 0; i < d; ++i)
    layers.push_back(random_matrix(gen, widths[i + 1], widths[i]));
  return Network(NetworkKind::feedforward, std::move(layers));
}

Network random_resnet(std::mt19937_64& gen, int max_depth, int max_width,
                      int max_inputs) {
  std::uniform_int_distribution<int> depth_dist(1, max_depth);
  int d = depth_dist(gen);
  int n = std::uniform_int_distribution<int>(1, max_inputs)(gen);
  int h = std::uniform_int_distribution<int>(2, max_width)(gen);
  std::vector<Matrix> layers;
  layers.push_back(random_matrix(gen, h, n));
  for (int i = 1; i < d; ++i) layers.push_back(random_matrix(gen, h, h));
  return Network(NetworkKind::resnet, std::move(layers));
}

// Gaussian perturbation rescaled per layer to τ·t_i/d with τ uniform in
// (0,1], exercising the lemma-assumption boundary rather than only tiny
// perturbations.
LayerPerturbation random_perturbation(std::mt19937_64& gen,
                                      const Network& net) {
  std::uniform_real_distribution<double> unif(
      std::numeric_limits<double>::min(), 1.0);
  LayerPerturbation u;
  for (int i = 0; i < net.depth(); ++i) {
    Matrix m = random_matrix(gen, static_cast<int>(net.layer(i).rows()),
                             static_cast<int>(net.layer(i).cols()));
    double target = unif(gen) * effective_norm(net, i) / net.depth();
    double s = spectral_norm(m);
    if (s > 0.0) m *= target / s;
    u.deltas.push_back(std::move(m));
  }
  return u;
}

}  // namespace

LayerPerturbation clamp_to_lemma_assumption(const Network& net,
                                            const LayerPerturbation& u) {
  if (static_cast<int>(u.deltas.size()) != net.depth())
    throw usage_error("clamp_to_lemma_assumption: layer count mismatch");
  LayerPerturbation out = u;
  for (int i = 0; i < net.depth(); ++i) {
    double cap = effective_norm(net, i) / net.depth();
    double s = spectral_norm(out.deltas[i]);
    if (s > cap && s > 0.0) out.deltas[i] *= cap / s;
  }
  return out;
}

TrialReport verify_layer_recursion(const Network& net, const Vector& x,
                                   const LayerPerturbation& u) {
  LayerPerturbation clamped = clamp_to_lemma_assumption(net, u);
  Network perturbed = perturb(net, clamped);
  const int d = net.depth();
  double xnorm = x.norm();

  double worst_measured = 0.0, worst_bound = 0.0;
  bool first = true;
  double prod = 1.0, ratio_sum = 0.0;
  for (int i = 1; i <= d; ++i) {
    double t = effective_norm(net, i - 1);
    prod *= t;
    ratio_sum += spectral_norm(clamped.deltas[i - 1]) / t;
    double bound =
        std::pow(1.0 + 1.0 / d, i) * prod * xnorm * ratio_sum;
    double measured =
        (layer_output(perturbed, x, i) - layer_output(net, x, i)).norm();
    // keep the layer with the least slack
    if (first || measured - bound > worst_measured - worst_bound) {
      worst_measured = measured;
      worst_bound = bound;
      first = false;
    }
  }
  return make_trial(0, worst_measured, worst_bound, 0.0);
}

namespace {

double margin_perturbation_bound(const Network& net,
                                 const LayerPerturbation& u,
                                 double magnitude) {
  double prod = 1.0, ratio_sum = 0.0;
  for (int i = 0; i < net.depth(); ++i) {
    double t = effective_norm(net, i);
    prod *= t;
    ratio_sum += spectral_norm(u.deltas[i]) / t;
  }
  return kTwoE * magnitude * prod * ratio_sum;
}

}  // namespace

TrialReport verify_margin_perturbation(const Network& net, const Vector& x,
                                       const LayerPerturbation& u, int i,
                                       int j, double norm_bound) {
  if (x.norm() > norm_bound * (1.0 + 1e-12))
    throw usage_error("verify_margin_perturbation: |x| exceeds B");
  LayerPerturbation clamped = clamp_to_lemma_assumption(net, u);
  Network perturbed = perturb(net, clamped);
  double gap = std::abs(margin_pair(forward(perturbed, x), i, j) -
                        margin_pair(forward(net, x), i, j));
  return make_trial(0, gap,
                    margin_perturbation_bound(net, clamped, norm_bound), 0.0);
}

TrialReport verify_robust_margin_perturbation(const Network& net,
                                              const Vector& x,
                                              const LayerPerturbation& u,
                                              int i, int j, double norm_bound,
                                              double epsilon,
                                              const OracleParams& oracle) {
  if (net.input_dim() > 3)
    throw usage_error("verify_robust_margin_perturbation: n <= 3 required");
  if (x.norm() > norm_bound * (1.0 + 1e-12))
    throw usage_error("verify_robust_margin_perturbation: |x| exceeds B");
  LayerPerturbation clamped = clamp_to_lemma_assumption(net, u);
  Network perturbed = perturb(net, clamped);
  auto obj = MarginObjective::pair(i, j);
  MarginResult rm_base = brute_force_robust_margin(
      net, x, obj, epsilon, oracle.resolution, oracle.extra_samples,
      oracle.seed);
  MarginResult rm_pert = brute_force_robust_margin(
      perturbed, x, obj, epsilon, oracle.resolution, oracle.extra_samples,
      oracle.seed + 1);
  double gap = std::abs(rm_pert.value - rm_base.value);
  double bound =
      margin_perturbation_bound(net, clamped, norm_bound + epsilon);
  return make_trial(0, gap, bound, rm_base.oracle_gap + rm_pert.oracle_gap);
}

TrialReport verify_endpoint_inequality(const Network& net_a,
                                       const Network& net_b, const Vector& x,
                                       int i, int j, double epsilon,
                                       const OracleParams& oracle) {
  if (net_a.input_dim() > 3)
    throw usage_error("verify_endpoint_inequality: n <= 3 required");
  auto obj = MarginObjective::pair(i, j);
  MarginResult inf_a = brute_force_robust_margin(
      net_a, x, obj, epsilon, oracle.resolution, oracle.extra_samples,
      oracle.seed);
  MarginResult inf_b = brute_force_robust_margin(
      net_b, x, obj, epsilon, oracle.resolution, oracle.extra_samples,
      oracle.seed + 1);
  double lhs = std::abs(inf_a.value - inf_b.value);
  auto gap_at = [&](const Vector& point) {
    return std::abs(margin_of(forward(net_a, point), obj) -
                    margin_of(forward(net_b, point), obj));
  };
  double rhs = std::max(gap_at(inf_a.witness), gap_at(inf_b.witness));
  return make_trial(0, lhs, rhs, inf_a.oracle_gap + inf_b.oracle_gap);
}

SuiteSummary verify_gaussian_tail(int h, double sigma,
                                  const std::vector<double>& t_grid,
                                  long trials, std::uint64_t seed) {
  if (trials < 10000)
    throw usage_error("verify_gaussian_tail: needs at least 1e4 trials");
  if (sigma <= 0.0) throw usage_error("verify_gaussian_tail: sigma must be > 0");
  std::vector<double> norms;
  norms.reserve(trials);
  for (long trial = 0; trial < trials; ++trial) {
    auto gen = rng::stream(seed, "tail", static_cast<std::uint64_t>(trial));
    std::normal_distribution<double> gauss(0.0, sigma);
    Matrix u(h, h);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < h; ++c) u(r, c) = gauss(gen);
    norms.push_back(spectral_norm(u));
  }
  SuiteSummary summary;
  summary.name = "tail-h" + std::to_string(h);
  for (double t : t_grid) {
    long exceed = std::count_if(norms.begin(), norms.end(),
                                [t](double n) { return n > t; });
    double freq = static_cast<double>(exceed) / trials;
    double bound = 2.0 * h * std::exp(-t * t / (2.0 * h * sigma * sigma));
    double se = std::sqrt(std::max(freq * (1.0 - freq), 0.0) / trials);
    // one-sided: only upward violations matter
    accumulate(summary, make_trial(static_cast<long>(summary.trials), freq,
                                   bound + 3.0 * se, 0.0));
  }
  summary.trials = trials;  // report the draw count, not the grid size
  return summary;
}

SuiteSummary verify_homogeneity(const Network& net,
                                const std::vector<Vector>& x_suite) {
  Network normalized = beta_normalize(net);
  double phi_before = spectral_complexity(net);
  double phi_after = spectral_complexity(normalized);
  SuiteSummary summary;
  summary.name = "homogeneity";
  double phi_err = std::abs(phi_after - phi_before) / phi_before;
  accumulate(summary, make_trial(0, phi_err, 1e-9, 0.0));
  for (const Vector& x : x_suite) {
    Vector a = forward(net, x);
    Vector b = forward(normalized, x);
    double err = (a - b).norm() / (1.0 + a.norm());
    accumulate(summary,
               make_trial(static_cast<long>(summary.trials), err, 1e-9, 0.0));
  }
  return summary;
}

SuiteSummary run_recursion_suite(long trials, std::uint64_t seed) {
  SuiteSummary summary;
  summary.name = "recursion";
  for (long t = 0; t < trials; ++t) {
    auto gen = rng::stream(seed, "recursion-trial", static_cast<std::uint64_t>(t));
    Network net = (t % 4 == 3) ? random_resnet(gen, 4, 16, 16)
                               : random_feedforward(gen, 4, 16, 16);
    Vector x = random_vector(gen, net.input_dim());
    LayerPerturbation u = random_perturbation(gen, net);
    TrialReport rep = verify_layer_recursion(net, x, u);
    rep.trial_id = t;
    accumulate(summary, rep);
  }
  return summary;
}

SuiteSummary run_margin_suite(long trials, std::uint64_t seed) {
  SuiteSummary summary;
  summary.name = "margin";
  for (long t = 0; t < trials; ++t) {
    auto gen = rng::stream(seed, "margin-trial", static_cast<std::uint64_t>(t));
    Network net = random_feedforward(gen, 4, 16, 16);
    Vector x = random_vector(gen, net.input_dim());
    LayerPerturbation u = random_perturbation(gen, net);
    std::uniform_int_distribution<int> cls(0, net.output_dim() - 1);
    TrialReport rep =
        verify_margin_perturbation(net, x, u, cls(gen), cls(gen), x.norm());
    rep.trial_id = t;
    accumulate(summary, rep);
  }
  return summary;
}

SuiteSummary run_robust_margin_suite(long trials, std::uint64_t seed,
                                     int resolution) {
  SuiteSummary summary;
  summary.name = "robust-margin";
  for (long t = 0; t < trials; ++t) {
    auto gen = rng::stream(seed, "robust-margin-trial",
                           static_cast<std::uint64_t>(t));
    Network net = random_feedforward(gen, 3, 8, 3);
    Vector x = random_vector(gen, net.input_dim());
    LayerPerturbation u = random_perturbation(gen, net);
    std::uniform_int_distribution<int> cls(0, net.output_dim() - 1);
    std::uniform_real_distribution<double> eps_dist(0.05, 0.5);
    OracleParams oracle{resolution, 100, rng::splitmix64(seed ^ (2 * t))};
    TrialReport rep = verify_robust_margin_perturbation(
        net, x, u, cls(gen), cls(gen), x.norm(), eps_dist(gen), oracle);
    rep.trial_id = t;
    accumulate(summary, rep);
  }
  return summary;
}

SuiteSummary run_endpoint_suite(long trials, std::uint64_t seed,
                                int resolution) {
  SuiteSummary summary;
  summary.name = "endpoint";
  for (long t = 0; t < trials; ++t) {
    auto gen = rng::stream(seed, "endpoint-trial", static_cast<std::uint64_t>(t));
    Network net_a = random_feedforward(gen, 3, 8, 3);
    LayerPerturbation u = random_perturbation(gen, net_a);
    Network net_b = perturb(net_a, u);
    Vector x = random_vector(gen, net_a.input_dim());
    std::uniform_int_distribution<int> cls(0, net_a.output_dim() - 1);
    std::uniform_real_distribution<double> eps_dist(0.05, 0.5);
    OracleParams oracle{resolution, 100, rng::splitmix64(seed ^ (2 * t + 1))};
    TrialReport rep = verify_endpoint_inequality(
        net_a, net_b, x, cls(gen), cls(gen), eps_dist(gen), oracle);
    rep.trial_id = t;
    accumulate(summary, rep);
  }
  return summary;
}

SuiteSummary run_tail_suite(long draws, std::uint64_t seed) {
  SuiteSummary merged;
  merged.name = "tail";
  bool first = true;
  for (int h : {2, 8, 32}) {
    // grid c·σ√(2h), c ∈ {0.5,…,2.5}: for h = 8 this is {2,4,6,8,10}
    std::vector<double> grid;
    for (double c : {0.5, 1.0, 1.5, 2.0, 2.5})
      grid.push_back(c * std::sqrt(2.0 * h));
    SuiteSummary s = verify_gaussian_tail(h, 1.0, grid, draws,
                                          rng::splitmix64(seed ^ h));
    merged.trials += s.trials;
    merged.violations += s.violations;
    merged.inconclusive += s.inconclusive;
    if (first || s.min_slack < merged.min_slack) merged.min_slack = s.min_slack;
    for (auto& [k, v] : s.slack_histogram) merged.slack_histogram[k] += v;
    first = false;
  }
  return merged;
}

SuiteSummary run_homogeneity_suite(long trials, std::uint64_t seed) {
  SuiteSummary merged;
  merged.name = "homogeneity";
  bool first = true;
  for (long t = 0; t < trials; ++t) {
    auto gen = rng::stream(seed, "homogeneity-trial",
                           static_cast<std::uint64_t>(t));
    Network net = random_feedforward(gen, 4, 16, 16);
    std::vector<Vector> suite;
    for (int s = 0; s < 100; ++s)
      suite.push_back(random_vector(gen, net.input_dim()));
    SuiteSummary s = verify_homogeneity(net, suite);
    merged.trials += s.trials;
    merged.violations += s.violations;
    merged.inconclusive += s.inconclusive;
    if (first || s.min_slack < merged.min_slack) merged.min_slack = s.min_slack;
    for (auto& [k, v] : s.slack_histogram) merged.slack_histogram[k] += v;
    first = false;
  }
  return merged;
}

}  // namespace specbound
