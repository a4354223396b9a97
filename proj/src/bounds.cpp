#include "specbound/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "specbound/errors.hpp"

namespace specbound {

std::string to_string(TheoremTag tag) {
  switch (tag) {
    case TheoremTag::standard: return "standard";
    case TheoremTag::robust: return "robust";
    case TheoremTag::robust_lp: return "robust_lp";
    case TheoremTag::nonlp: return "nonlp";
    case TheoremTag::resnet: return "resnet";
    case TheoremTag::farnia: return "farnia";
  }
  return "?";
}

namespace {

struct LayerNorms {
  std::vector<double> spectral;
  std::vector<double> frobenius;
  std::vector<double> effective;  // spectral, or spectral+1 for resnets
};

LayerNorms layer_norms(const Network& net) {
  LayerNorms out;
  for (const auto& w : net.layers()) {
    double s = spectral_norm(w);
    out.spectral.push_back(s);
    out.frobenius.push_back(frobenius_norm(w));
    out.effective.push_back(net.kind() == NetworkKind::resnet ? s + 1.0 : s);
  }
  return out;
}

void require_positive_norms(const LayerNorms& norms) {
  for (std::size_t i = 0; i < norms.effective.size(); ++i)
    if (norms.effective[i] == 0.0)
      throw numeric_error("layer " + std::to_string(i + 1) +
                          " has zero spectral norm; the spectrally normalized "
                          "quantities are undefined");
}

void validate_inputs(const BoundInputs& in) {
  if (in.norm_bound <= 0.0) throw usage_error("bound inputs: B must be > 0");
  if (in.epsilon < 0.0) throw usage_error("bound inputs: epsilon must be >= 0");
  if (in.gamma <= 0.0) throw usage_error("bound inputs: gamma must be > 0");
  if (in.delta <= 0.0 || in.delta >= 1.0)
    throw usage_error("bound inputs: delta must be in (0,1)");
  if (in.m < 2) throw usage_error("bound inputs: m must be >= 2");
  if (in.input_dim < 1) throw usage_error("bound inputs: n must be >= 1");
}

}  // namespace

double complexity_from_norms(const std::vector<double>& effective,
                             const std::vector<double>& frobenius) {
  double prod = 1.0, sum = 0.0;
  for (std::size_t i = 0; i < effective.size(); ++i) {
    prod *= effective[i] * effective[i];
    sum += frobenius[i] * frobenius[i] / (effective[i] * effective[i]);
  }
  return prod * sum;
}

double spectral_complexity(const Network& net) {
  if (net.kind() != NetworkKind::feedforward)
    throw usage_error("spectral_complexity: feedforward networks only");
  LayerNorms norms = layer_norms(net);
  require_positive_norms(norms);
  return complexity_from_norms(norms.effective, norms.frobenius);
}

double resnet_complexity(const Network& net) {
  if (net.kind() != NetworkKind::resnet)
    throw usage_error("resnet_complexity: resnet networks only");
  LayerNorms norms = layer_norms(net);
  if (std::all_of(norms.frobenius.begin(), norms.frobenius.end(),
                  [](double f) { return f == 0.0; }))
    return 0.0;
  return complexity_from_norms(norms.effective, norms.frobenius);
}

LipschitzProfile lipschitz_profile(const Network& net) {
  LayerNorms norms = layer_norms(net);
  require_positive_norms(norms);
  double prod = 1.0;
  for (double t : norms.effective) prod *= t;
  LipschitzProfile out;
  for (double t : norms.effective)
    out.coefficients.push_back(2.0 * std::exp(1.0) * prod / t);
  return out;
}

double lp_correction(int n, NormOrder p) {
  if (n < 1) throw usage_error("lp_correction: n must be >= 1");
  double inv_p;
  switch (p) {
    case NormOrder::l1: inv_p = 1.0; break;
    case NormOrder::l2: inv_p = 0.5; break;
    case NormOrder::linf: inv_p = 0.0; break;
  }
  return std::max(1.0, std::pow(static_cast<double>(n), 0.5 - inv_p));
}

double sigma_choice(double gamma, int d, double magnitude, double beta_tilde,
                    int h) {
  if (gamma <= 0.0 || d < 1 || magnitude <= 0.0 || beta_tilde <= 0.0 || h < 1)
    throw usage_error("sigma_choice: all arguments must be positive");
  return gamma / (42.0 * d * magnitude * std::pow(beta_tilde, d - 1) *
                  std::sqrt(h * std::log(4.0 * h * d)));
}

double kl_term(const Network& net, double sigma) {
  if (sigma <= 0.0) throw usage_error("kl_term: sigma must be > 0");
  double sum = 0.0;
  for (const auto& w : net.layers()) {
    double f = frobenius_norm(w);
    sum += f * f;
  }
  return sum / (2.0 * sigma * sigma);
}

double pac_bayes_combine(double kl, long m, double delta) {
  if (kl < 0.0) throw usage_error("pac_bayes_combine: kl must be >= 0");
  if (m < 2) throw usage_error("pac_bayes_combine: m must be >= 2");
  if (delta <= 0.0 || delta >= 1.0)
    throw usage_error("pac_bayes_combine: delta must be in (0,1)");
  return 4.0 * std::sqrt((kl + std::log(6.0 * m / delta)) / (m - 1));
}

namespace {

BoundReport bound_pipeline(const Network& net, const BoundInputs& in,
                           TheoremTag mode, double kl_inflation,
                           std::optional<double> c_fgm) {
  validate_inputs(in);
  LayerNorms norms = layer_norms(net);
  require_positive_norms(norms);
  const int d = net.depth();
  const int h = net.max_width();

  double magnitude;
  switch (mode) {
    case TheoremTag::standard:
      magnitude = in.norm_bound + 0.0;  // the ε = 0 robust pipeline
      break;
    case TheoremTag::robust:
    case TheoremTag::resnet:
    case TheoremTag::farnia:
      magnitude = in.norm_bound + in.epsilon;
      break;
    case TheoremTag::robust_lp:
      magnitude = lp_correction(in.input_dim, in.p) *
                  (in.norm_bound + in.epsilon);
      break;
    case TheoremTag::nonlp:
      if (!in.magnitude_cap)
        throw usage_error("non-lp bound requires the magnitude bound D");
      if (*in.magnitude_cap <= 0.0)
        throw usage_error("non-lp bound: D must be > 0");
      magnitude = *in.magnitude_cap;
      break;
  }

  BoundReport rep;
  rep.theorem_tag = mode;
  rep.inputs = in;
  rep.depth = d;
  rep.width = h;
  for (std::size_t i = 0; i < norms.spectral.size(); ++i)
    rep.per_layer.emplace_back(norms.spectral[i], norms.frobenius[i]);
  rep.phi = complexity_from_norms(norms.effective, norms.frobenius);

  double log_beta = 0.0;
  for (double t : norms.effective) log_beta += std::log(t);
  rep.beta = std::exp(log_beta / d);

  rep.magnitude = magnitude;
  rep.sigma = sigma_choice(in.gamma, d, magnitude, rep.beta, h);
  rep.kl_upper = kl_inflation * kl_term(net, rep.sigma);
  double ln_term = in.union_bound ? std::log(6.0 * d * in.m / in.delta)
                                  : std::log(6.0 * in.m / in.delta);
  rep.bound_value = 4.0 * std::sqrt((rep.kl_upper + ln_term) / (in.m - 1));
  rep.c_fgm = c_fgm;
  return rep;
}

}  // namespace

BoundReport generalization_bound(const Network& net, const BoundInputs& inputs,
                                 TheoremTag mode) {
  if (mode == TheoremTag::farnia) return farnia_bound(net, inputs);
  if (mode == TheoremTag::resnet && net.kind() != NetworkKind::resnet)
    throw usage_error("resnet bound mode requires a resnet network");
  if (mode != TheoremTag::resnet && net.kind() != NetworkKind::feedforward)
    throw usage_error(to_string(mode) +
                      " bound mode requires a feedforward network");
  return bound_pipeline(net, inputs, mode, 1.0, std::nullopt);
}

BoundReport farnia_bound(const Network& net, const BoundInputs& inputs) {
  if (net.kind() != NetworkKind::feedforward)
    throw usage_error("farnia bound requires a feedforward network");
  if (!inputs.kappa) throw usage_error("farnia bound requires kappa");
  if (*inputs.kappa <= 0.0) throw usage_error("farnia bound: kappa must be > 0");
  LayerNorms norms = layer_norms(net);
  require_positive_norms(norms);
  double prod_all = 1.0;
  for (double s : norms.spectral) prod_all *= s;
  double prefix_sum = 0.0, prefix = 1.0;
  for (double s : norms.spectral) {
    prefix *= s;
    prefix_sum += prefix;
  }
  double c_fgm = (inputs.epsilon / *inputs.kappa) * prod_all * prefix_sum;
  return bound_pipeline(net, inputs, TheoremTag::farnia, 1.0 + c_fgm, c_fgm);
}

}  // namespace specbound
