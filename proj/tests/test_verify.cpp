#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "specbound/errors.hpp"
#include "specbound/verify.hpp"

using namespace specbound;

namespace {

LayerPerturbation zero_like(const Network& net) {
  LayerPerturbation u;
  for (int l = 0; l < net.depth(); ++l)
    u.deltas.push_back(Matrix::Zero(net.layer(l).rows(), net.layer(l).cols()));
  return u;
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

}  // namespace

TEST_CASE("clamp enforces the layer-wise norm cap") {
  std::mt19937_64 gen(31);
  Network net = oracles::random_mlp(gen, {3, 5, 4});
  LayerPerturbation u = random_like(gen, net, 10.0);
  LayerPerturbation c = clamp_to_lemma_assumption(net, u);
  for (int l = 0; l < net.depth(); ++l) {
    double cap = spectral_norm(net.layer(l)) / net.depth();
    CHECK(spectral_norm(c.deltas[l]) <= cap * (1.0 + 1e-10));
  }
  // small perturbations are untouched
  LayerPerturbation tiny = random_like(gen, net, 1e-6);
  LayerPerturbation kept = clamp_to_lemma_assumption(net, tiny);
  for (int l = 0; l < net.depth(); ++l)
    CHECK((kept.deltas[l] - tiny.deltas[l]).norm() == 0.0);
}

TEST_CASE("layer recursion trivial cases") {
  std::mt19937_64 gen(32);
  Network net = oracles::random_mlp(gen, {3, 5, 4});
  Vector x = oracles::random_vector(gen, 3);
  TrialReport zero = verify_layer_recursion(net, x, zero_like(net));
  CHECK(zero.pass);
  CHECK(zero.measured_gap == 0.0);

  Network one = oracles::random_mlp(gen, {3, 4});
  LayerPerturbation u = random_like(gen, one, 0.1);
  TrialReport d1 = verify_layer_recursion(one, x, u);
  CHECK(d1.pass);
}

TEST_CASE("layer recursion holds over random trials") {
  std::mt19937_64 gen(33);
  std::uniform_int_distribution<int> depth(1, 4), width(2, 16);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> widths{width(gen)};
    int d = depth(gen);
    for (int i = 0; i < d; ++i) widths.push_back(width(gen));
    Network net = oracles::random_mlp(gen, widths);
    Vector x = oracles::random_vector(gen, widths.front());
    LayerPerturbation u = random_like(gen, net, 0.5);
    TrialReport r = verify_layer_recursion(net, x, u);
    CHECK(r.pass);
  }
}

TEST_CASE("margin perturbation trivial cases and random trials") {
  std::mt19937_64 gen(34);
  Network net = oracles::random_mlp(gen, {3, 5, 4});
  Vector x = oracles::random_vector(gen, 3);
  double b = x.norm() + 1.0;
  TrialReport zero = verify_margin_perturbation(net, x, zero_like(net), 0, 1, b);
  CHECK(zero.pass);
  CHECK(zero.measured_gap == 0.0);

  LayerPerturbation u = random_like(gen, net, 0.3);
  TrialReport same = verify_margin_perturbation(net, x, u, 2, 2, b);
  CHECK(same.pass);
  CHECK(same.measured_gap == 0.0);

  for (int trial = 0; trial < 300; ++trial) {
    Network n2 = oracles::random_mlp(gen, {3, 8, 8, 4});
    Vector x2 = oracles::random_vector(gen, 3);
    LayerPerturbation u2 = random_like(gen, n2, 0.4);
    TrialReport r =
        verify_margin_perturbation(n2, x2, u2, trial % 4, (trial + 1) % 4,
                                   x2.norm());
    CHECK(r.pass);
  }
}

TEST_CASE("robust margin perturbation reduces to margin at eps 0") {
  std::mt19937_64 gen(35);
  Network net = oracles::random_mlp(gen, {2, 4, 3});
  Vector x = oracles::random_vector(gen, 2);
  LayerPerturbation u = random_like(gen, net, 0.2);
  OracleParams oracle{21, 50, 1};
  TrialReport rob =
      verify_robust_margin_perturbation(net, x, u, 0, 1, x.norm(), 0.0, oracle);
  TrialReport plain = verify_margin_perturbation(net, x, u, 0, 1, x.norm());
  CHECK(rob.pass);
  CHECK(rob.measured_gap == doctest::Approx(plain.measured_gap).epsilon(1e-9));
}

TEST_CASE("robust margin perturbation holds over a small random suite") {
  std::mt19937_64 gen(36);
  OracleParams oracle{21, 50, 2};
  for (int trial = 0; trial < 15; ++trial) {
    Network net = oracles::random_mlp(gen, {2, 6, 3});
    Vector x = oracles::random_vector(gen, 2);
    LayerPerturbation u = random_like(gen, net, 0.3);
    TrialReport r = verify_robust_margin_perturbation(net, x, u, 0, 1, x.norm(),
                                                      0.2, oracle);
    CHECK(r.pass);
  }
}

TEST_CASE("endpoint inequality trivial and perturbative cases") {
  std::mt19937_64 gen(37);
  Network net = oracles::random_mlp(gen, {2, 5, 3});
  Vector x = oracles::random_vector(gen, 2);
  OracleParams oracle{21, 50, 3};
  TrialReport same = verify_endpoint_inequality(net, net, x, 0, 1, 0.2, oracle);
  CHECK(same.pass);
  CHECK(same.measured_gap == 0.0);

  LayerPerturbation tiny = random_like(gen, net, 1e-8);
  Network near = perturb(net, tiny);
  TrialReport cont = verify_endpoint_inequality(net, near, x, 0, 1, 0.2, oracle);
  CHECK(cont.pass);

  for (int trial = 0; trial < 10; ++trial) {
    Network a = oracles::random_mlp(gen, {2, 4, 3});
    LayerPerturbation u = random_like(gen, a, 0.3);
    Network b = perturb(a, u);
    Vector x2 = oracles::random_vector(gen, 2);
    TrialReport r = verify_endpoint_inequality(a, b, x2, 0, 2, 0.15, oracle);
    CHECK(r.pass);
  }
}

TEST_CASE("gaussian tail bound holds") {
  SuiteSummary s = verify_gaussian_tail(8, 1.0, {2, 4, 6, 8, 10}, 10000, 5);
  CHECK(s.violations == 0);
  CHECK(s.trials == 10000);

  // t = 0: bound 2h >= 1 >= frequency
  SuiteSummary at0 = verify_gaussian_tail(4, 1.0, {0.0}, 10000, 6);
  CHECK(at0.violations == 0);

  CHECK_THROWS_AS(verify_gaussian_tail(4, 0.0, {1.0}, 10000, 7), usage_error);
  CHECK_THROWS_AS(verify_gaussian_tail(4, 1.0, {1.0}, 100, 7), usage_error);
}

TEST_CASE("homogeneity verification") {
  std::mt19937_64 gen(38);
  Network net = oracles::random_mlp(gen, {3, 6, 4});
  std::vector<Vector> suite;
  for (int i = 0; i < 100; ++i) suite.push_back(oracles::random_vector(gen, 3));
  SuiteSummary s = verify_homogeneity(net, suite);
  CHECK(s.violations == 0);
  CHECK(s.trials == 101);  // 100 inputs plus the phi-invariance check
}

TEST_CASE("suite drivers are deterministic and clean") {
  SuiteSummary a = run_recursion_suite(50, 9);
  SuiteSummary b = run_recursion_suite(50, 9);
  CHECK(a.violations == 0);
  CHECK(a.min_slack == b.min_slack);
  CHECK(a.slack_histogram == b.slack_histogram);

  SuiteSummary m = run_margin_suite(100, 10);
  CHECK(m.violations == 0);
  CHECK(m.trials == 100);

  SuiteSummary rm = run_robust_margin_suite(10, 11);
  CHECK(rm.violations == 0);

  SuiteSummary ep = run_endpoint_suite(10, 12);
  CHECK(ep.violations == 0);

  SuiteSummary tail = run_tail_suite(10000, 13);
  CHECK(tail.violations == 0);

  SuiteSummary hom = run_homogeneity_suite(10, 14);
  CHECK(hom.violations == 0);

  SuiteSummary hom2 = run_homogeneity_suite(10, 14);
  CHECK(hom.min_slack == hom2.min_slack);
}
