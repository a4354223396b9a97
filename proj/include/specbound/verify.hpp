#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "specbound/margin.hpp"
#include "specbound/network.hpp"

namespace specbound {

// One measured inequality instance. pass is false only when the measured gap
// exceeds the bound by more than the oracle slack plus 1e-12; a raw
// violation inside the oracle slack is inconclusive, not a violation.
struct TrialReport {
  long trial_id = 0;
  double measured_gap = 0.0;
  double bound_value = 0.0;
  double slack_ratio = 0.0;  // bound/measured, +inf when measured = 0
  double oracle_error_bound = 0.0;  // 0 for exact measurement paths
  bool pass = true;
  bool inconclusive = false;
};

struct SuiteSummary {
  std::string name;
  long trials = 0;
  long violations = 0;
  long inconclusive = 0;
  double min_slack = 0.0;
  // slack_ratio histogram, keyed by floor(log10(slack_ratio)); the +inf
  // bucket (measured = 0) is keyed at 99.
  std::map<int, long> slack_histogram;
};

// Scales u down layer-wise where needed so ‖U_i‖₂ ≤ ‖W_i‖₂/d (resnets:
// (‖W_i‖₂+1)/d), the assumption under which the perturbation lemmas hold.
LayerPerturbation clamp_to_lemma_assumption(const Network& net,
                                            const LayerPerturbation& u);

// Checks the layer-wise induction bound
//   Δ_i ≤ (1+1/d)^i (∏_{j≤i} t_j) |x|₂ Σ_{j≤i} ‖U_j‖₂/t_j
// with t = ‖W‖₂ (feedforward) or ‖W‖₂+1 (resnet), reporting the layer with
// the least slack. u is clamped to the lemma assumption first.
TrialReport verify_layer_recursion(const Network& net, const Vector& x,
                                   const LayerPerturbation& u);

// |M(f_{w+u}, i, j) − M(f_w, i, j)| ≤ 2e·B·∏t_l·Σ‖U_i‖₂/t_i. Requires
// |x|₂ ≤ B; u clamped to the lemma assumption.
TrialReport verify_margin_perturbation(const Network& net, const Vector& x,
                                       const LayerPerturbation& u, int i,
                                       int j, double norm_bound);

struct OracleParams {
  int resolution = 41;
  int extra_samples = 200;
  std::uint64_t seed = 0;
};

// Same inequality for the robust margin operator over the ℓ₂ ε-ball, with
// both RM values taken from the brute-force oracle (n ≤ 3); the two grid gap
// bounds add up into oracle_error_bound.
TrialReport verify_robust_margin_perturbation(const Network& net,
                                              const Vector& x,
                                              const LayerPerturbation& u,
                                              int i, int j, double norm_bound,
                                              double epsilon,
                                              const OracleParams& oracle);

// |inf g_w − inf g_{w'}| ≤ max of the two endpoint gaps, evaluated at the
// brute-force argmins of both robustified margins.
TrialReport verify_endpoint_inequality(const Network& net_a,
                                       const Network& net_b, const Vector& x,
                                       int i, int j, double epsilon,
                                       const OracleParams& oracle);

// Empirical exceedance of ‖U‖₂ for h×h Gaussian σ-entry matrices against
// 2h·e^{−t²/(2hσ²)} at each grid t, with a one-sided 3-binomial-SE
// tolerance. Requires trials >= 1e4.
SuiteSummary verify_gaussian_tail(int h, double sigma,
                                  const std::vector<double>& t_grid,
                                  long trials, std::uint64_t seed);

// β-normalized forward outputs and Φ agree with the original network within
// 1e-9 relative error over the input suite.
SuiteSummary verify_homogeneity(const Network& net,
                                const std::vector<Vector>& x_suite);

// Randomized suite drivers behind the CLI. Each is deterministic given
// (trials, seed): per-trial streams are keyed by (seed, trial id).
SuiteSummary run_recursion_suite(long trials, std::uint64_t seed);
SuiteSummary run_margin_suite(long trials, std::uint64_t seed);
SuiteSummary run_robust_margin_suite(long trials, std::uint64_t seed,
                                     int resolution = 41);
SuiteSummary run_endpoint_suite(long trials, std::uint64_t seed,
                                int resolution = 41);
SuiteSummary run_tail_suite(long draws, std::uint64_t seed);
SuiteSummary run_homogeneity_suite(long trials, std::uint64_t seed);

}  // namespace specbound
