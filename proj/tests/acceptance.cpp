// End-to-end acceptance gate: one line per criterion, nonzero exit when any
// criterion fails. Criteria that shell out to the CLI use SPECBOUND_CLI_PATH.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "specbound/bounds.hpp"
#include "specbound/data_io.hpp"
#include "specbound/linalg.hpp"
#include "specbound/margin.hpp"
#include "specbound/train.hpp"
#include "specbound/verify.hpp"

using namespace specbound;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, double seconds) {
  std::ostringstream line;
  line << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << " - " << what
       << " (" << std::fixed << seconds << "s)";
  std::cout << line.str() << "\n";
  if (!ok) ++failures;
}

double elapsed(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string cli_path() { return SPECBOUND_CLI_PATH; }

int run_cli(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "specbound_acceptance";
  fs::create_directories(dir);
  return dir;
}

LayerPerturbation random_like(std::mt19937_64& gen, const Network& net,
                              double scale) {
  LayerPerturbation u;
  for (int l = 0; l < net.depth(); ++l)
    u.deltas.push_back(oracles::random_matrix(
        gen, static_cast<int>(net.layer(l).rows()),
        static_cast<int>(net.layer(l).cols()), scale));
  return u;
}

Network random_net(std::mt19937_64& gen, int max_depth, int max_width,
                   int in_dim) {
  std::uniform_int_distribution<int> depth(1, max_depth);
  std::uniform_int_distribution<int> width(2, max_width);
  std::vector<int> widths{in_dim};
  int d = depth(gen);
  for (int i = 0; i < d; ++i) widths.push_back(width(gen));
  return oracles::random_mlp(gen, widths);
}

void criterion_1() {
  auto start = clock_type::now();
  std::mt19937_64 gen(101);
  bool ok = true;
  for (int trial = 0; trial < 500; ++trial) {
    int n = trial % 2 == 0 ? 2 : 3;
    Matrix w = oracles::random_matrix(gen, n, n);
    double expected = oracles::spectral_norm_small(w);
    double got = spectral_norm(w);
    if (std::abs(got - expected) > 1e-8 * std::max(1.0, expected)) ok = false;
  }
  double secs = elapsed(start);
  report(1, ok && secs < 5.0,
         "power iteration vs characteristic-polynomial oracle, 500 matrices, "
         "rel err <= 1e-8",
         secs);
}

void criterion_2() {
  auto start = clock_type::now();
  std::mt19937_64 gen(102);
  long violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Network net = random_net(gen, 4, 16, 3);
    std::vector<Vector> suite;
    for (int i = 0; i < 100; ++i)
      suite.push_back(oracles::random_vector(gen, 3));
    SuiteSummary s = verify_homogeneity(net, suite);
    violations += s.violations;
  }
  report(2, violations == 0,
         "beta-normalization homogeneity, 100 nets x 100 inputs, 1e-9 "
         "relative",
         elapsed(start));
}

void criterion_3() {
  auto start = clock_type::now();
  SuiteSummary s = run_recursion_suite(1000, 103);
  double secs = elapsed(start);
  report(3, s.violations == 0 && secs < 30.0,
         "layer-recursion lemma, 1000 trials, zero violations", secs);
}

void criterion_4() {
  auto start = clock_type::now();
  SuiteSummary s = run_margin_suite(1000, 104);
  report(4, s.violations == 0,
         "margin-perturbation lemma, 1000 trials, zero violations",
         elapsed(start));
}

void criterion_5() {
  auto start = clock_type::now();
  SuiteSummary rm = run_robust_margin_suite(200, 105, 41);
  SuiteSummary ep = run_endpoint_suite(200, 106, 41);
  double secs = elapsed(start);
  report(5, rm.violations == 0 && ep.violations == 0 && secs < 300.0,
         "robust-margin and endpoint lemmas, 200 trials each, brute-force "
         "oracle res 41",
         secs);
}

void criterion_6() {
  auto start = clock_type::now();
  std::mt19937_64 gen(107);
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    Matrix w = oracles::random_matrix(gen, 3, 4);
    Network net(NetworkKind::feedforward, {w});
    Vector x = oracles::random_vector(gen, 4);
    MarginObjective obj = MarginObjective::pair(0, 1);
    AttackSpec spec;
    spec.epsilon = 0.3;
    spec.seed = trial;
    MarginResult pgd = pgd_minimize_margin(net, x, obj, spec);
    MarginResult exact =
        exact_linear_robust_margin(net, x, obj, NormOrder::l2, spec.epsilon);
    if (std::abs(pgd.value - exact.value) > 1e-4) ok = false;
  }
  report(6, ok,
         "PGD matches the single-layer closed form within 1e-4 on 100 nets",
         elapsed(start));
}

void criterion_7() {
  auto start = clock_type::now();
  std::mt19937_64 gen(108);
  bool ok = true;
  BoundInputs base;
  base.norm_bound = 1.0;
  base.gamma = 1.0;
  base.delta = 0.05;
  base.m = 1000;
  base.input_dim = 3;

  for (int trial = 0; trial < 100 && ok; ++trial) {
    Network net = random_net(gen, 3, 8, 3);
    BoundInputs in = base;
    in.epsilon = 0.0;
    if (generalization_bound(net, in, TheoremTag::robust).bound_value !=
        generalization_bound(net, in, TheoremTag::standard).bound_value)
      ok = false;
    double prev = -1.0;
    for (int k = 0; k <= 10; ++k) {
      in.epsilon = 0.1 * k;
      double v = generalization_bound(net, in, TheoremTag::robust).bound_value;
      if (v < prev) ok = false;
      prev = v;
    }
    in.epsilon = 0.5;
    for (double kappa : {1e-3, 1.0, 1e3}) {
      in.kappa = kappa;
      if (farnia_bound(net, in).bound_value <
          generalization_bound(net, in, TheoremTag::robust).bound_value)
        ok = false;
    }
  }
  Network fixed = oracles::random_mlp(gen, {3, 6, 4});
  BoundInputs in = base;
  in.epsilon = 0.5;
  in.kappa = 1e-9;
  double tiny = farnia_bound(fixed, in).bound_value;
  in.kappa = 1.0;
  double unit = farnia_bound(fixed, in).bound_value;
  if (tiny / unit < 1e3) ok = false;
  report(7, ok,
         "bound identities: eps=0 bit-equality, eps-monotonicity, farnia "
         "domination and kappa divergence",
         elapsed(start));
}

void criterion_8() {
  auto start = clock_type::now();
  long m0 = 100000;
  double delta = 0.05;
  double kl = 100.0 * std::log(6.0 * 100 * m0 / delta);
  double ratio =
      pac_bayes_combine(kl, 100 * m0, delta) / pac_bayes_combine(kl, m0, delta);
  report(8, ratio >= 0.095 && ratio <= 0.105,
         "1/sqrt(m) scaling: bound(100m)/bound(m) in [0.095, 0.105]",
         elapsed(start));
}

void criterion_9() {
  auto start = clock_type::now();
  bool ok = lp_correction(4, NormOrder::l2) == 1.0 &&
            lp_correction(4, NormOrder::linf) == 2.0 &&
            lp_correction(4, NormOrder::l1) == 1.0 &&
            lp_correction(100, NormOrder::l2) == 1.0 &&
            lp_correction(100, NormOrder::l1) == 1.0;
  report(9, ok, "lp correction spot values exact", elapsed(start));
}

void criterion_10() {
  auto start = clock_type::now();
  long violations = 0;
  int h_index = 0;
  for (int h : {2, 8, 32}) {
    std::vector<double> grid;
    for (int c = 1; c <= 5; ++c) grid.push_back(0.5 * c * std::sqrt(2.0 * h));
    SuiteSummary s = verify_gaussian_tail(h, 1.0, grid, 100000, 110 + h_index);
    violations += s.violations;
    ++h_index;
  }
  double secs = elapsed(start);
  report(10, violations == 0 && secs < 120.0,
         "gaussian tail bound, h in {2,8,32}, 1e5 draws per width", secs);
}

void criterion_11() {
  auto start = clock_type::now();
  Dataset data = gen_blobs(4, 10, 2000, 4.0, 5.0, 111);
  TrainConfig std_cfg;
  std_cfg.hidden_widths = {32, 32};
  std_cfg.epochs = 100;
  std_cfg.learning_rate = 0.05;
  std_cfg.seed = 111;
  auto [std_net, std_hist] = train(data, std_cfg);

  TrainConfig adv_cfg = std_cfg;
  adv_cfg.mode = TrainMode::adversarial;
  adv_cfg.attack.p = NormOrder::l2;
  adv_cfg.attack.epsilon = 0.5;
  auto [adv_net, adv_hist] = train(data, adv_cfg);

  double phi_std = spectral_complexity(std_net);
  double phi_adv = spectral_complexity(adv_net);

  BoundInputs in;
  in.norm_bound = data.norm_bound;
  in.gamma = 1.0;
  in.delta = 0.05;
  in.m = data.size();
  in.input_dim = data.input_dim;
  in.epsilon = 0.0;
  double std_bound =
      generalization_bound(std_net, in, TheoremTag::standard).bound_value;
  in.epsilon = 0.5;
  double adv_bound =
      generalization_bound(adv_net, in, TheoremTag::robust).bound_value;

  double secs = elapsed(start);
  report(11, phi_adv > phi_std && adv_bound > std_bound && secs < 300.0,
         "desk-scale trend: adversarial training inflates Phi and the robust "
         "bound exceeds the standard one",
         secs);
}

void criterion_12() {
  auto start = clock_type::now();
  fs::path dir = work_dir();
  bool ok = true;

  fs::path v1 = dir / "verify1.json";
  fs::path v2 = dir / "verify2.json";
  std::string vflags = "verify --suite homogeneity --trials 20 --seed 12 --out ";
  ok = ok && run_cli(vflags + "\"" + v1.string() + "\"") == 0;
  ok = ok && run_cli(vflags + "\"" + v2.string() + "\"") == 0;
  ok = ok && read_all(v1) == read_all(v2) && !read_all(v1).empty();

  fs::path data = dir / "data.tsv";
  fs::path net = dir / "net.json";
  ok = ok && run_cli("gen-data --k 2 --n 3 --m 40 --sep 4 --B 5 --seed 12 "
                     "--out \"" + data.string() + "\"") == 0;
  ok = ok && run_cli("train --data \"" + data.string() +
                     "\" --hidden 8 --epochs 5 --seed 12 --out-net \"" +
                     net.string() + "\"") == 0;
  fs::path a1 = dir / "analyze1.json";
  fs::path a2 = dir / "analyze2.json";
  std::string aflags = "analyze --net \"" + net.string() + "\" --data \"" +
                       data.string() + "\" --eps 0.3 --seed 12 --out ";
  ok = ok && run_cli(aflags + "\"" + a1.string() + "\"") == 0;
  ok = ok && run_cli(aflags + "\"" + a2.string() + "\"") == 0;
  ok = ok && read_all(a1) == read_all(a2) && !read_all(a1).empty();

  report(12, ok, "verify and analyze reruns are byte-identical",
         elapsed(start));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  if (failures == 0) {
    std::cout << "acceptance: all criteria passed\n";
    return 0;
  }
  std::cout << "acceptance: " << failures << " criteria failed\n";
  return 1;
}
