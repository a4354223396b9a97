// Command-line surface: gen-data, train, analyze, verify, attack-eval.
// Every command is a pure function of (input files, flags, seed): reruns
// produce byte-identical outputs. Logs go to stderr, artifacts to the paths
// given on the command line.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specbound/bounds.hpp"
#include "specbound/data_io.hpp"
#include "specbound/errors.hpp"
#include "specbound/train.hpp"
#include "specbound/verify.hpp"

namespace sb = specbound;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailure = 2;
constexpr int kExitNumeric = 3;

sb::NormOrder parse_norm(const std::string& p) {
  if (p == "1") return sb::NormOrder::l1;
  if (p == "2") return sb::NormOrder::l2;
  if (p == "inf") return sb::NormOrder::linf;
  throw sb::usage_error("unknown norm order: " + p + " (use 1, 2 or inf)");
}

sb::ReportFormat parse_format(const std::string& f) {
  if (f == "json") return sb::ReportFormat::json;
  if (f == "csv") return sb::ReportFormat::csv;
  throw sb::usage_error("unknown report format: " + f);
}

std::vector<int> parse_widths(const std::string& spec) {
  std::vector<int> widths;
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      widths.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw sb::usage_error("bad width list: " + spec);
    }
  }
  if (widths.empty()) throw sb::usage_error("empty width list");
  return widths;
}

double resolve_gamma(const std::string& gamma_flag, const sb::Network& net,
                     const sb::Dataset& data) {
  if (gamma_flag != "auto") {
    double g = std::stod(gamma_flag);
    if (g <= 0.0) throw sb::usage_error("--gamma must be positive or 'auto'");
    return g;
  }
  std::vector<double> margins;
  for (int s = 0; s < data.size(); ++s)
    margins.push_back(
        sb::margin_label(sb::forward(net, data.xs[s]), data.ys[s]));
  std::sort(margins.begin(), margins.end());
  std::size_t mid = margins.size() / 2;
  double median = margins.size() % 2 == 1
                      ? margins[mid]
                      : 0.5 * (margins[mid - 1] + margins[mid]);
  return std::max(1e-6, median);
}

struct AnalyzeOpts {
  std::string net_path, data_path, out_path;
  std::string gamma_flag = "auto";
  std::string p_flag = "2";
  std::string format_flag = "json";
  double eps = 0.0;
  double delta = 0.05;
  std::optional<double> farnia_kappa;
  std::optional<double> nonlp_cap;
  bool union_bound = false;
  bool compare = false;
  bool skip_attack = false;
  std::uint64_t seed = 0;
};

int run_analyze(const AnalyzeOpts& opt) {
  sb::Network net = sb::load_network(opt.net_path);
  sb::Dataset data = sb::load_dataset(opt.data_path);
  if (net.input_dim() != data.input_dim)
    throw sb::usage_error("network input dimension does not match dataset");
  if (opt.eps < 0.0) throw sb::usage_error("--eps must be >= 0");

  sb::BoundInputs inputs;
  inputs.norm_bound = data.norm_bound;
  inputs.epsilon = opt.eps;
  inputs.gamma = resolve_gamma(opt.gamma_flag, net, data);
  inputs.delta = opt.delta;
  inputs.m = data.size();
  inputs.p = parse_norm(opt.p_flag);
  inputs.input_dim = data.input_dim;
  inputs.kappa = opt.farnia_kappa;
  inputs.magnitude_cap = opt.nonlp_cap;
  inputs.union_bound = opt.union_bound;

  std::vector<sb::BoundReport> reports;
  if (net.kind() == sb::NetworkKind::resnet) {
    reports.push_back(
        sb::generalization_bound(net, inputs, sb::TheoremTag::resnet));
  } else {
    reports.push_back(
        sb::generalization_bound(net, inputs, sb::TheoremTag::standard));
    reports.push_back(
        sb::generalization_bound(net, inputs, sb::TheoremTag::robust));
    if (inputs.p != sb::NormOrder::l2)
      reports.push_back(
          sb::generalization_bound(net, inputs, sb::TheoremTag::robust_lp));
    if (inputs.magnitude_cap)
      reports.push_back(
          sb::generalization_bound(net, inputs, sb::TheoremTag::nonlp));
    if (inputs.kappa) reports.push_back(sb::farnia_bound(net, inputs));
  }

  std::optional<sb::AttackSpec> attack;
  if (!opt.skip_attack) {
    sb::AttackSpec a;
    a.p = inputs.p;
    a.epsilon = opt.eps;
    a.seed = opt.seed;
    attack = a;
  }
  sb::EmpiricalLosses losses =
      sb::empirical_losses(net, data, inputs.gamma, attack);

  sb::Provenance prov;
  prov.seed = opt.seed;
  prov.union_bound = opt.union_bound;

  if (parse_format(opt.format_flag) == sb::ReportFormat::json) {
    std::ostringstream out;
    out << "{\"schema\": \"specbound-analysis-v1\", \"provenance\": "
        << sb::provenance_json(prov) << ", \"gamma\": "
        << sb::sci(inputs.gamma) << ", \"empirical\": {\"clean_loss\": "
        << sb::sci(losses.clean_loss);
    if (losses.robust_loss)
      out << ", \"robust_loss_attack_lower_bound\": "
          << sb::sci(*losses.robust_loss);
    out << "}, \"reports\": [";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i) out << ", ";
      out << sb::report_json(reports[i]);
    }
    out << "]}\n";
    std::ofstream f(opt.out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw sb::format_error("cannot open for writing: " + opt.out_path);
    f << out.str();
  } else {
    std::ostringstream out;
    bool header = false;
    for (const auto& rep : reports) {
      std::string block = sb::report_csv(rep, prov);
      if (header) block = block.substr(block.find('\n') + 1);
      out << block;
      header = true;
    }
    out << "# gamma=" << sb::sci(inputs.gamma)
        << " clean_loss=" << sb::sci(losses.clean_loss);
    if (losses.robust_loss)
      out << " robust_loss_attack_lower_bound=" << sb::sci(*losses.robust_loss);
    out << "\n";
    std::ofstream f(opt.out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw sb::format_error("cannot open for writing: " + opt.out_path);
    f << out.str();
  }

  if (opt.compare && reports.size() >= 2) {
    // Table-1-style two-column comparison (standard vs robust)
    const auto& std_rep = reports[0];
    const auto& rob_rep = reports[1];
    std::cout << "quantity,standard,robust\n";
    std::cout << "empirical_loss," << sb::sci(losses.clean_loss) << ","
              << (losses.robust_loss ? sb::sci(*losses.robust_loss) : "")
              << "\n";
    std::cout << "bound," << sb::sci(std_rep.bound_value) << ","
              << sb::sci(rob_rep.bound_value) << "\n";
  }
  return kExitOk;
}

int run_verify(const std::string& suite, long trials, std::uint64_t seed,
               const std::string& out_path, const std::string& format_flag) {
  if (trials < 1) throw sb::usage_error("--trials must be >= 1");
  std::vector<sb::SuiteSummary> summaries;
  auto want = [&](const char* name) {
    return suite == "all" || suite == name;
  };
  bool matched = false;
  if (want("recursion")) {
    summaries.push_back(sb::run_recursion_suite(trials, seed));
    matched = true;
  }
  if (want("margin")) {
    summaries.push_back(sb::run_margin_suite(trials, seed));
    matched = true;
  }
  if (want("robust-margin")) {
    summaries.push_back(sb::run_robust_margin_suite(trials, seed));
    matched = true;
  }
  if (want("endpoint")) {
    summaries.push_back(sb::run_endpoint_suite(trials, seed));
    matched = true;
  }
  if (want("tail")) {
    summaries.push_back(sb::run_tail_suite(std::max<long>(trials, 10000), seed));
    matched = true;
  }
  if (want("homogeneity")) {
    summaries.push_back(sb::run_homogeneity_suite(trials, seed));
    matched = true;
  }
  if (!matched) throw sb::usage_error("unknown suite: " + suite);

  sb::Provenance prov;
  prov.seed = seed;
  std::ostringstream out;
  if (parse_format(format_flag) == sb::ReportFormat::json) {
    out << "{\"schema\": \"specbound-verify-v1\", \"provenance\": "
        << sb::provenance_json(prov) << ", \"suites\": [";
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      if (i) out << ", ";
      out << sb::report_json(summaries[i]);
    }
    out << "]}\n";
  } else {
    bool header = false;
    for (const auto& s : summaries) {
      std::string block = sb::report_csv(s, prov);
      if (header) block = block.substr(block.find('\n') + 1);
      out << block;
      header = true;
    }
  }
  std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw sb::format_error("cannot open for writing: " + out_path);
  f << out.str();

  long total_violations = 0;
  for (const auto& s : summaries) {
    total_violations += s.violations;
    std::cerr << "suite " << s.name << ": " << s.trials << " trials, "
              << s.violations << " violations, " << s.inconclusive
              << " inconclusive\n";
  }
  return total_violations == 0 ? kExitOk : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectrally-normalized PAC-Bayes bound computation and "
               "perturbation-lemma verification"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a Gaussian-blob dataset");
  int gd_k = 2, gd_n = 2, gd_m = 100;
  double gd_sep = 2.0, gd_b = 5.0;
  std::uint64_t gd_seed = 0;
  std::string gd_out;
  gen->add_option("--k", gd_k, "class count");
  gen->add_option("--n", gd_n, "input dimension");
  gen->add_option("--m", gd_m, "sample count");
  gen->add_option("--sep", gd_sep, "min distance between cluster centers");
  gen->add_option("--B", gd_b, "l2 norm bound");
  gen->add_option("--seed", gd_seed, "rng seed");
  gen->add_option("--out", gd_out, "output dataset path")->required();

  // train
  auto* tr = app.add_subcommand("train", "train a ReLU MLP with SGD");
  std::string tr_data, tr_hidden = "32", tr_mode = "standard";
  std::string tr_out_net, tr_out_history;
  int tr_epochs = 50, tr_batch = 32;
  double tr_lr = 0.1, tr_eps = 0.5;
  std::string tr_p = "2";
  std::uint64_t tr_seed = 0;
  tr->add_option("--data", tr_data, "training dataset")->required();
  tr->add_option("--hidden", tr_hidden, "comma-separated hidden widths");
  tr->add_option("--epochs", tr_epochs, "epoch count");
  tr->add_option("--lr", tr_lr, "learning rate");
  tr->add_option("--batch", tr_batch, "batch size");
  tr->add_option("--mode", tr_mode, "standard | adversarial");
  tr->add_option("--eps", tr_eps, "attack radius (adversarial mode)");
  tr->add_option("--p", tr_p, "attack norm order: 1, 2, inf");
  tr->add_option("--seed", tr_seed, "rng seed");
  tr->add_option("--out-net", tr_out_net, "output network path")->required();
  tr->add_option("--out-history", tr_out_history, "output history CSV");

  // analyze
  auto* an = app.add_subcommand("analyze", "compute generalization bounds");
  AnalyzeOpts an_opt;
  an->add_option("--net", an_opt.net_path, "network file")->required();
  an->add_option("--data", an_opt.data_path, "dataset file")->required();
  an->add_option("--eps", an_opt.eps, "attack radius");
  an->add_option("--gamma", an_opt.gamma_flag, "margin, or 'auto'");
  an->add_option("--delta", an_opt.delta, "confidence level");
  an->add_option("--p", an_opt.p_flag, "attack norm order: 1, 2, inf");
  double an_kappa = 0.0, an_d = 0.0;
  auto* kappa_opt = an->add_option("--farnia-kappa", an_kappa,
                                   "gradient floor for the FGM comparison");
  auto* d_opt = an->add_option("--nonlp-D", an_d,
                               "magnitude bound for non-lp constraint sets");
  an->add_flag("--union-bound", an_opt.union_bound,
               "use ln(6dm/delta) in the combiner");
  an->add_flag("--compare", an_opt.compare,
               "print a standard-vs-robust comparison table");
  an->add_flag("--skip-attack", an_opt.skip_attack,
               "skip the per-sample PGD attack (bounds only)");
  an->add_option("--seed", an_opt.seed, "rng seed");
  an->add_option("--out", an_opt.out_path, "output report path")->required();
  an->add_option("--format", an_opt.format_flag, "json | csv");

  // verify
  auto* ve = app.add_subcommand("verify", "run lemma verification suites");
  std::string ve_suite = "all", ve_out, ve_format = "json";
  long ve_trials = 1000;
  std::uint64_t ve_seed = 0;
  ve->add_option("--suite", ve_suite,
                 "recursion | margin | robust-margin | endpoint | tail | "
                 "homogeneity | all");
  ve->add_option("--trials", ve_trials, "trials per suite");
  ve->add_option("--seed", ve_seed, "rng seed");
  ve->add_option("--out", ve_out, "output summary path")->required();
  ve->add_option("--format", ve_format, "json | csv");

  // attack-eval
  auto* ae = app.add_subcommand("attack-eval",
                                "per-sample clean and robust margins");
  std::string ae_net, ae_data, ae_out, ae_p = "2";
  double ae_eps = 0.0;
  std::uint64_t ae_seed = 0;
  ae->add_option("--net", ae_net, "network file")->required();
  ae->add_option("--data", ae_data, "dataset file")->required();
  ae->add_option("--eps", ae_eps, "attack radius");
  ae->add_option("--p", ae_p, "attack norm order: 1, 2, inf");
  ae->add_option("--seed", ae_seed, "rng seed");
  ae->add_option("--out", ae_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      sb::Dataset data = sb::gen_blobs(gd_k, gd_n, gd_m, gd_sep, gd_b, gd_seed);
      sb::save_dataset(data, gd_out);
      return kExitOk;
    }
    if (tr->parsed()) {
      sb::Dataset data = sb::load_dataset(tr_data);
      sb::TrainConfig config;
      config.hidden_widths = parse_widths(tr_hidden);
      config.epochs = tr_epochs;
      config.learning_rate = tr_lr;
      config.batch_size = tr_batch;
      if (tr_mode == "standard") config.mode = sb::TrainMode::standard;
      else if (tr_mode == "adversarial") config.mode = sb::TrainMode::adversarial;
      else throw sb::usage_error("unknown mode: " + tr_mode);
      config.attack.p = parse_norm(tr_p);
      config.attack.epsilon = tr_eps;
      config.seed = tr_seed;
      auto [net, history] = sb::train(data, config);
      sb::save_network(net, tr_out_net);
      if (!tr_out_history.empty()) sb::save_history(history, tr_out_history);
      return kExitOk;
    }
    if (an->parsed()) {
      if (*kappa_opt) an_opt.farnia_kappa = an_kappa;
      if (*d_opt) an_opt.nonlp_cap = an_d;
      return run_analyze(an_opt);
    }
    if (ve->parsed())
      return run_verify(ve_suite, ve_trials, ve_seed, ve_out, ve_format);
    if (ae->parsed()) {
      sb::Network net = sb::load_network(ae_net);
      sb::Dataset data = sb::load_dataset(ae_data);
      if (net.input_dim() != data.input_dim)
        throw sb::usage_error("network input dimension does not match dataset");
      sb::AttackSpec attack;
      attack.p = parse_norm(ae_p);
      attack.epsilon = ae_eps;
      std::ostringstream out;
      out << "sample,label,clean_margin,robust_margin,method\n";
      for (int s = 0; s < data.size(); ++s) {
        sb::Vector logits = sb::forward(net, data.xs[s]);
        double clean = sb::margin_label(logits, data.ys[s]);
        sb::AttackSpec per_sample = attack;
        per_sample.seed = ae_seed + static_cast<std::uint64_t>(s) * 0x9e3779b9ULL;
        sb::MarginResult r = sb::robust_margin(
            net, data.xs[s], sb::MarginObjective::label(data.ys[s]),
            per_sample);
        const char* method =
            r.method == sb::MarginMethod::exact_linear ? "exact_linear"
            : r.method == sb::MarginMethod::pgd        ? "pgd"
                                                       : "brute_force";
        out << s << "," << data.ys[s] << "," << sb::sci(clean) << ","
            << sb::sci(r.value) << "," << method << "\n";
      }
      std::ofstream f(ae_out, std::ios::binary | std::ios::trunc);
      if (!f) throw sb::format_error("cannot open for writing: " + ae_out);
      f << out.str();
      return kExitOk;
    }
  } catch (const sb::usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sb::format_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sb::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
