#include "specbound/margin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "specbound/errors.hpp"
#include "specbound/rng.hpp"

namespace specbound {

double margin_pair(const Vector& logits, int i, int j) {
  if (i < 0 || j < 0 || i >= logits.size() || j >= logits.size())
    throw usage_error("margin_pair: class index out of range");
  return logits[i] - logits[j];
}

double margin_label(const Vector& logits, int y) {
  if (logits.size() < 2)
    throw usage_error("margin_label: needs at least two classes");
  if (y < 0 || y >= logits.size())
    throw usage_error("margin_label: label out of range");
  double best_other = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < logits.size(); ++j)
    if (j != y) best_other = std::max(best_other, logits[j]);
  return logits[y] - best_other;
}

double margin_of(const Vector& logits, const MarginObjective& obj) {
  return obj.is_pair ? margin_pair(logits, obj.i, obj.j)
                     : margin_label(logits, obj.y);
}

namespace {

// Seed direction whose inner product with the logits equals the (locally
// linearized) margin objective. For the label objective the best wrong class
// is re-identified at the current point; ties break to the smallest index.
Vector objective_seed(const Vector& logits, const MarginObjective& obj) {
  Vector seed = Vector::Zero(logits.size());
  if (obj.is_pair) {
    seed[obj.i] += 1.0;
    seed[obj.j] -= 1.0;
  } else {
    int best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < logits.size(); ++j)
      if (j != obj.y && logits[j] > best_val) {
        best_val = logits[j];
        best = static_cast<int>(j);
      }
    seed[obj.y] += 1.0;
    seed[best] -= 1.0;
  }
  return seed;
}

double norm_of(const Vector& v, NormOrder p) {
  switch (p) {
    case NormOrder::l1: return v.lpNorm<1>();
    case NormOrder::l2: return v.norm();
    case NormOrder::linf: return v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

double dual_norm_of(const Vector& v, NormOrder p) {
  switch (p) {
    case NormOrder::l1: return v.lpNorm<Eigen::Infinity>();
    case NormOrder::l2: return v.norm();
    case NormOrder::linf: return v.lpNorm<1>();
  }
  return 0.0;
}

// Exact projection of v onto the ℓ₁ ball of radius eps (sorted soft
// threshold).
Vector project_l1(const Vector& v, double eps) {
  if (v.lpNorm<1>() <= eps) return v;
  Vector a = v.cwiseAbs();
  std::vector<double> sorted(a.data(), a.data() + a.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    double t = (cumsum - eps) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double mag = std::max(std::abs(v[i]) - theta, 0.0);
    out[i] = std::copysign(mag, v[i]);
  }
  return out;
}

// Steepest-descent direction of unit p-norm for gradient g.
Vector descent_direction(const Vector& g, NormOrder p) {
  switch (p) {
    case NormOrder::l2: {
      double n = g.norm();
      return n > 0.0 ? Vector(g / n) : Vector(Vector::Zero(g.size()));
    }
    case NormOrder::linf:
      return g.unaryExpr([](double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); });
    case NormOrder::l1: {
      Eigen::Index k;
      g.cwiseAbs().maxCoeff(&k);
      Vector d = Vector::Zero(g.size());
      d[k] = g[k] > 0.0 ? 1.0 : (g[k] < 0.0 ? -1.0 : 0.0);
      return d;
    }
  }
  return Vector::Zero(g.size());
}

// Uniform draw from the p-ball of radius eps around center.
Vector sample_ball(std::mt19937_64& gen, const Vector& center, NormOrder p,
                   double eps) {
  const Eigen::Index n = center.size();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector delta(n);
  switch (p) {
    case NormOrder::l2: {
      for (Eigen::Index i = 0; i < n; ++i) delta[i] = gauss(gen);
      double nn = delta.norm();
      if (nn == 0.0) return center;
      double r = eps * std::pow(unif(gen), 1.0 / static_cast<double>(n));
      delta *= r / nn;
      break;
    }
    case NormOrder::linf: {
      for (Eigen::Index i = 0; i < n; ++i)
        delta[i] = eps * (2.0 * unif(gen) - 1.0);
      break;
    }
    case NormOrder::l1: {
      std::exponential_distribution<double> expo(1.0);
      double total = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        delta[i] = expo(gen) * (unif(gen) < 0.5 ? -1.0 : 1.0);
        total += std::abs(delta[i]);
      }
      if (total == 0.0) return center;
      double r = eps * std::pow(unif(gen), 1.0 / static_cast<double>(n));
      delta *= r / total;
      break;
    }
  }
  return center + delta;
}

}  // namespace

Vector project_ball(const Vector& point, const Vector& center, NormOrder p,
                    double eps) {
  Vector delta = point - center;
  switch (p) {
    case NormOrder::l2: {
      double n = delta.norm();
      if (n > eps) delta *= eps / n;
      break;
    }
    case NormOrder::linf:
      delta = delta.cwiseMax(-eps).cwiseMin(eps);
      break;
    case NormOrder::l1:
      delta = project_l1(delta, eps);
      break;
  }
  return center + delta;
}

MarginResult pgd_minimize_margin(const Network& net, const Vector& x,
                                 const MarginObjective& obj,
                                 const AttackSpec& spec) {
  if (x.size() != net.input_dim())
    throw usage_error("pgd_minimize_margin: input dimension mismatch");
  if (spec.epsilon < 0.0)
    throw usage_error("pgd_minimize_margin: epsilon must be >= 0");
  if (spec.steps < 1 || spec.restarts < 1)
    throw usage_error("pgd_minimize_margin: steps and restarts must be >= 1");
  const double step =
      spec.step_size > 0.0 ? spec.step_size : 2.5 * spec.epsilon / spec.steps;

  MarginResult best;
  best.method = MarginMethod::pgd;
  best.value = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& cand) {
    double v = margin_of(forward(net, cand), obj);
    if (v < best.value) {
      best.value = v;
      best.witness = cand;
    }
    return v;
  };

  for (int r = 0; r < spec.restarts; ++r) {
    Vector cur;
    if (r == 0) {
      cur = x;
    } else {
      auto gen = rng::stream(spec.seed, "pgd-restart", static_cast<std::uint64_t>(r));
      cur = sample_ball(gen, x, spec.p, spec.epsilon);
    }
    consider(cur);
    if (spec.epsilon == 0.0) break;  // degenerate ball: the center is the ball
    for (int s = 0; s < spec.steps; ++s) {
      Vector logits = forward(net, cur);
      Vector g = backprop_input(net, cur, objective_seed(logits, obj));
      cur = project_ball(cur - step * descent_direction(g, spec.p), x, spec.p,
                         spec.epsilon);
      consider(cur);
    }
  }
  return best;
}

MarginResult exact_linear_robust_margin(const Network& net, const Vector& x,
                                        const MarginObjective& obj,
                                        NormOrder p, double eps) {
  if (net.depth() != 1)
    throw usage_error("exact_linear_robust_margin: requires a 1-layer net");
  if (eps < 0.0)
    throw usage_error("exact_linear_robust_margin: epsilon must be >= 0");
  const Matrix& w = net.layer(0);

  // inf over the ball of a minimum of linear functions equals the minimum of
  // the per-pair closed forms wᵀx − ε‖w‖_q with q dual to p.
  auto pair_case = [&](int i, int j) {
    Vector diff = (w.row(i) - w.row(j)).transpose();
    double value = diff.dot(x) - eps * dual_norm_of(diff, p);
    Vector delta = Vector::Zero(x.size());
    if (eps > 0.0) {
      switch (p) {
        case NormOrder::l2: {
          double n = diff.norm();
          if (n > 0.0) delta = -eps * diff / n;
          break;
        }
        case NormOrder::linf:
          delta = -eps * diff.unaryExpr([](double t) {
            return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
          });
          break;
        case NormOrder::l1: {
          Eigen::Index k;
          diff.cwiseAbs().maxCoeff(&k);
          delta[k] = -eps * (diff[k] > 0.0 ? 1.0 : (diff[k] < 0.0 ? -1.0 : 0.0));
          break;
        }
      }
    }
    return std::make_pair(value, Vector(x + delta));
  };

  MarginResult res;
  res.method = MarginMethod::exact_linear;
  if (obj.is_pair) {
    auto [v, wit] = pair_case(obj.i, obj.j);
    res.value = v;
    res.witness = wit;
  } else {
    if (w.rows() < 2)
      throw usage_error("exact_linear_robust_margin: needs k >= 2 for label objective");
    res.value = std::numeric_limits<double>::infinity();
    for (int j = 0; j < w.rows(); ++j) {
      if (j == obj.y) continue;
      auto [v, wit] = pair_case(obj.y, j);
      if (v < res.value) {
        res.value = v;
        res.witness = wit;
      }
    }
  }
  return res;
}

MarginResult brute_force_robust_margin(const Network& net, const Vector& x,
                                       const MarginObjective& obj, double eps,
                                       int resolution, int extra_samples,
                                       std::uint64_t seed) {
  const int n = net.input_dim();
  if (n > 3)
    throw usage_error("brute_force_robust_margin: oracle limited to n <= 3");
  if (resolution < 3)
    throw usage_error("brute_force_robust_margin: resolution must be >= 3");
  if (x.size() != n)
    throw usage_error("brute_force_robust_margin: input dimension mismatch");
  if (eps < 0.0)
    throw usage_error("brute_force_robust_margin: epsilon must be >= 0");

  MarginResult res;
  res.method = MarginMethod::brute_force;
  res.value = margin_of(forward(net, x), obj);
  res.witness = x;
  if (eps == 0.0) return res;

  const double spacing = 2.0 * eps / (resolution - 1);
  const double cell_diag = spacing * std::sqrt(static_cast<double>(n));
  // Candidates: cube-grid points inside the ball, boundary-adjacent grid
  // points projected radially onto the sphere, and random interior samples.
  // Every feasible point then has an evaluated candidate within cell_diag,
  // so the gap to the true infimum is at most L_x · cell_diag.
  std::vector<Vector> candidates;
  std::vector<int> idx(n, 0);
  Vector delta(n);
  while (true) {
    for (int a = 0; a < n; ++a) delta[a] = -eps + spacing * idx[a];
    double nn = delta.norm();
    if (nn <= eps) {
      candidates.push_back(x + delta);
    } else if (nn <= eps + cell_diag) {
      candidates.push_back(x + (eps / nn) * delta);
    }
    int a = 0;
    while (a < n && ++idx[a] == resolution) idx[a++] = 0;
    if (a == n) break;
  }
  auto gen = rng::stream(seed, "brute-extra");
  for (int s = 0; s < extra_samples; ++s)
    candidates.push_back(sample_ball(gen, x, NormOrder::l2, eps));

  constexpr int kChunk = 4096;
  for (std::size_t base = 0; base < candidates.size(); base += kChunk) {
    std::size_t cnt = std::min<std::size_t>(kChunk, candidates.size() - base);
    Matrix batch(n, cnt);
    for (std::size_t c = 0; c < cnt; ++c) batch.col(c) = candidates[base + c];
    Matrix logits = forward_batch(net, batch);
    for (std::size_t c = 0; c < cnt; ++c) {
      double v = margin_of(logits.col(c), obj);
      if (v < res.value) {
        res.value = v;
        res.witness = candidates[base + c];
      }
    }
  }
  res.oracle_gap = input_lipschitz_bound(net) * cell_diag;
  return res;
}

MarginResult robust_margin(const Network& net, const Vector& x,
                           const MarginObjective& obj, const AttackSpec& spec) {
  if (net.depth() == 1 && net.kind() == NetworkKind::feedforward)
    return exact_linear_robust_margin(net, x, obj, spec.p, spec.epsilon);
  return pgd_minimize_margin(net, x, obj, spec);
}

EmpiricalLosses empirical_losses(const Network& net, const Dataset& data,
                                 double gamma,
                                 const std::optional<AttackSpec>& attack) {
  if (data.size() == 0) throw usage_error("empirical_losses: empty dataset");
  if (gamma < 0.0) throw usage_error("empirical_losses: gamma must be >= 0");
  EmpiricalLosses out;
  int clean_hits = 0, robust_hits = 0;
  for (int s = 0; s < data.size(); ++s) {
    double clean = margin_label(forward(net, data.xs[s]), data.ys[s]);
    if (clean <= gamma) ++clean_hits;
    if (attack) {
      AttackSpec per_sample = *attack;
      per_sample.seed = rng::splitmix64(
          rng::splitmix64(attack->seed ^ rng::hash_tag("sample")) ^
          static_cast<std::uint64_t>(s));
      MarginResult r = robust_margin(net, data.xs[s],
                                     MarginObjective::label(data.ys[s]),
                                     per_sample);
      if (r.value <= gamma) ++robust_hits;
    }
  }
  out.clean_loss = static_cast<double>(clean_hits) / data.size();
  if (attack)
    out.robust_loss = static_cast<double>(robust_hits) / data.size();
  return out;
}

double input_lipschitz_bound(const Network& net) {
  double prod = 1.0;
  for (const auto& w : net.layers()) {
    double s = spectral_norm(w);
    prod *= net.kind() == NetworkKind::resnet ? s + 1.0 : s;
  }
  return prod;
}

}  // namespace specbound
