#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specbound/margin.hpp"
#include "specbound/network.hpp"

namespace specbound {

enum class TheoremTag { standard, robust, robust_lp, nonlp, resnet, farnia };

std::string to_string(TheoremTag tag);

struct BoundInputs {
  double norm_bound = 1.0;     // B, ℓ₂ bound on sample norms
  double epsilon = 0.0;        // attack radius
  double gamma = 1.0;          // margin
  double delta = 0.05;         // confidence
  long m = 2;                  // sample count
  NormOrder p = NormOrder::l2;
  int input_dim = 1;           // n, used by the ℓ_p correction
  std::optional<double> kappa;          // gradient floor, farnia mode only
  std::optional<double> magnitude_cap;  // D, non-ℓ_p mode only
  // Replaces ln(6m/δ) by ln(6dm/δ) to surface the β̃-grid union bound.
  bool union_bound = false;
};

struct BoundReport {
  TheoremTag theorem_tag = TheoremTag::standard;
  double phi = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  double kl_upper = 0.0;
  std::vector<std::pair<double, double>> per_layer;  // (spectral, frobenius)
  double magnitude = 0.0;  // the (B+ε), correction·(B+ε), or D actually used
  double bound_value = 0.0;
  std::optional<double> c_fgm;
  BoundInputs inputs;
  int depth = 0;
  int width = 0;  // h
};

// Per-layer perturbation sensitivity of the margin operator:
// A_i = 2e·∏‖W_l‖₂/‖W_i‖₂ (feedforward), with ‖W‖₂+1 in place of ‖W‖₂ for
// resnets.
struct LipschitzProfile {
  std::vector<double> coefficients;
};

// Φ = ∏‖W_i‖₂² · Σ ‖W_i‖_F²/‖W_i‖₂². Feedforward only; throws numeric_error
// on a zero-spectral-norm layer.
double spectral_complexity(const Network& net);

// Φ(f_RN) = ∏(‖W_i‖₂+1)² · Σ ‖W_i‖_F²/(‖W_i‖₂+1)². Resnet kind only.
double resnet_complexity(const Network& net);

// Shared kernel of the two Φ formulas: effective norms t_i with Frobenius
// norms f_i gives ∏t_i² · Σ f_i²/t_i².
double complexity_from_norms(const std::vector<double>& effective,
                             const std::vector<double>& frobenius);

LipschitzProfile lipschitz_profile(const Network& net);

// max{1, n^{1/2 − 1/p}}, the sample-dimension correction for non-ℓ₂ attacks.
double lp_correction(int n, NormOrder p);

// σ = γ / (42·d·magnitude·β̃^{d−1}·√(h·ln(4hd))).
double sigma_choice(double gamma, int d, double magnitude, double beta_tilde,
                    int h);

// Σ‖W_i‖_F² / (2σ²).
double kl_term(const Network& net, double sigma);

// 4·√((kl + ln(6m/δ)) / (m−1)).
double pac_bayes_combine(double kl, long m, double delta);

// Full bound pipeline for one theorem mode. Standard mode is the robust
// pipeline evaluated at ε = 0 (same code path, bit-identical).
BoundReport generalization_bound(const Network& net, const BoundInputs& inputs,
                                 TheoremTag mode);

// Prior-work FGM comparison bound: same σ/KL/combiner pipeline with the KL
// numerator inflated by (1 + C^fgm),
// C^fgm = (ε/κ)·(∏‖W_i‖₂)·(Σ_i ∏_{j≤i}‖W_j‖₂).
BoundReport farnia_bound(const Network& net, const BoundInputs& inputs);

}  // namespace specbound
