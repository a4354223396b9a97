#pragma once

#include <cstdint>
#include <optional>

#include "specbound/dataset.hpp"
#include "specbound/network.hpp"

namespace specbound {

enum class NormOrder { l1, l2, linf };

// ℓ_p ball attack parameters. Deterministic given seed: every restart and
// every sample draws from its own keyed stream.
struct AttackSpec {
  NormOrder p = NormOrder::l2;
  double epsilon = 0.0;
  int steps = 40;
  double step_size = 0.0;  // 0 means the default 2.5·ε/steps
  int restarts = 10;
  std::uint64_t seed = 0;
};

// Which margin the attack drives down: a fixed class pair (i, j) or the true
// label's margin against the best wrong class.
struct MarginObjective {
  bool is_pair = false;
  int i = 0, j = 0;  // pair mode
  int y = 0;         // label mode

  static MarginObjective pair(int i, int j) { return {true, i, j, 0}; }
  static MarginObjective label(int y) { return {false, 0, 0, y}; }
};

enum class MarginMethod { exact_linear, pgd, brute_force };

struct MarginResult {
  double value = 0.0;
  Vector witness;  // the x' achieving the reported value, feasible
  MarginMethod method = MarginMethod::pgd;
  // Upper bound on how far value can sit above the true infimum; nonzero
  // only for the grid oracle.
  double oracle_gap = 0.0;
};

// M(logits, i, j) = logits[i] − logits[j].
double margin_pair(const Vector& logits, int i, int j);

// M(logits, y) = logits[y] − max_{j≠y} logits[j]. Requires k ≥ 2.
double margin_label(const Vector& logits, int y);

double margin_of(const Vector& logits, const MarginObjective& obj);

// Projects point onto the p-ball of radius eps centered at center.
Vector project_ball(const Vector& point, const Vector& center, NormOrder p,
                    double eps);

// Projected gradient descent on the margin objective over the ε-ball around
// x. Returns the best point seen across all restarts and steps (so the value
// is nonincreasing in the step budget). Any feasible point upper-bounds the
// infimum.
MarginResult pgd_minimize_margin(const Network& net, const Vector& x,
                                 const MarginObjective& obj,
                                 const AttackSpec& spec);

// Closed form for single-layer nets: inf over the ℓ_p ε-ball of a minimum of
// linear functions, via the dual norm.
MarginResult exact_linear_robust_margin(const Network& net, const Vector& x,
                                        const MarginObjective& obj,
                                        NormOrder p, double eps);

// Grid + random-sample oracle over the ℓ₂ ε-ball, n ≤ 3 only. The reported
// oracle_gap bounds the distance to the true infimum by
// input-Lipschitz × grid diameter.
MarginResult brute_force_robust_margin(const Network& net, const Vector& x,
                                       const MarginObjective& obj, double eps,
                                       int resolution, int extra_samples,
                                       std::uint64_t seed);

// Dispatcher: exact closed form when d = 1, PGD otherwise.
MarginResult robust_margin(const Network& net, const Vector& x,
                           const MarginObjective& obj, const AttackSpec& spec);

struct EmpiricalLosses {
  double clean_loss = 0.0;
  // Fraction of samples where the attack finds a point with margin ≤ γ; a
  // lower bound on the true robust margin loss (the search may miss points).
  std::optional<double> robust_loss;
};

EmpiricalLosses empirical_losses(const Network& net, const Dataset& data,
                                 double gamma,
                                 const std::optional<AttackSpec>& attack);

// Input-Lipschitz bound ∏‖W_i‖₂ (feedforward) or ∏(‖W_i‖₂+1) (resnet).
double input_lipschitz_bound(const Network& net);

}  // namespace specbound
