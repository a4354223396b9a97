#include "specbound/linalg.hpp"

#include <cmath>
#include <sstream>

#include "specbound/errors.hpp"
#include "specbound/rng.hpp"

namespace specbound {

void check_finite(const Matrix& w, const char* name) {
  if (w.rows() < 1 || w.cols() < 1)
    throw usage_error(std::string(name) + ": empty matrix");
  if (!w.allFinite())
    throw usage_error(std::string(name) + ": non-finite entries");
}

void check_finite(const Vector& v, const char* name) {
  if (v.size() < 1) throw usage_error(std::string(name) + ": empty vector");
  if (!v.allFinite())
    throw usage_error(std::string(name) + ": non-finite entries");
}

double frobenius_norm(const Matrix& w) {
  check_finite(w);
  return w.norm();
}

namespace {

// Largest eigenvalue of a symmetric 2x2 matrix.
double top_eig2(double a, double b, double c) {
  return 0.5 * (a + c + std::sqrt((a - c) * (a - c) + 4.0 * b * b));
}

// Orthonormalizes the columns of v in place. Returns the number of columns
// that survived (a dependent second column is zeroed out).
int orthonormalize(Matrix& v) {
  double n0 = v.col(0).norm();
  if (n0 == 0.0) return 0;
  v.col(0) /= n0;
  if (v.cols() == 1) return 1;
  double before = v.col(1).norm();
  // Two projection passes: one pass leaves a non-orthogonal residual when
  // the columns are nearly parallel, which would corrupt the Ritz estimate.
  v.col(1) -= v.col(0).dot(v.col(1)) * v.col(0);
  v.col(1) -= v.col(0).dot(v.col(1)) * v.col(0);
  double n1 = v.col(1).norm();
  if (n1 <= 1e-12 * before) {
    v.col(1).setZero();
    return 1;
  }
  v.col(1) /= n1;
  return 2;
}

// Subspace power iteration on the Gram operator V -> Wᵀ(WV) with a block of
// two directions; the Ritz estimate of σ₁² then converges geometrically with
// ratio (σ₃/σ₁)², so a near-degenerate top pair does not stall it.
// Successive-change extrapolation sums the geometric tail and the stopping
// rule fires only after two consecutive stable estimates, so one noisy
// plateau cannot stop the iteration early. Returns (estimate, converged).
std::pair<double, bool> power_iterate(const Matrix& w, Matrix v, double tol,
                                      int max_iter) {
  double lambda = 0.0;  // current estimate of σ₁²
  double prev_change = 0.0;
  double prev_extrap = -1.0;
  int stable = 0;
  for (int it = 0; it < max_iter; ++it) {
    if (orthonormalize(v) == 0) return {lambda, true};  // hit the null space
    Matrix wv = w * v;
    Matrix t = wv.transpose() * wv;  // projected Gram, 2x2 (or 1x1)
    double next = t.cols() == 2 ? top_eig2(t(0, 0), t(0, 1), t(1, 1)) : t(0, 0);
    v = w.transpose() * wv;

    double change = next - lambda;  // monotone nondecreasing Ritz values
    if (it > 0) {
      // Geometric-tail extrapolation: remaining ≈ change·r/(1−r) with
      // r = ratio of successive changes.
      double extrap = next;
      if (prev_change > 0.0 && change > 0.0) {
        double r = change / prev_change;
        if (r < 1.0) extrap = next + change * r / (1.0 - r);
      }
      bool raw_ok = std::abs(change) <= tol * std::max(next, 1e-300);
      bool ext_ok = prev_extrap >= 0.0 &&
                    std::abs(extrap - prev_extrap) <=
                        tol * std::max(extrap, 1e-300);
      if (raw_ok || ext_ok) {
        if (++stable >= 2) return {extrap, true};
      } else {
        stable = 0;
      }
      prev_extrap = extrap;
    }
    prev_change = std::abs(change);
    lambda = next;
  }
  return {lambda, false};
}

}  // namespace

double spectral_norm(const Matrix& w, double tol, int max_iter) {
  check_finite(w);
  if (tol <= 0.0) throw usage_error("spectral_norm: tol must be positive");
  if (max_iter < 1) throw usage_error("spectral_norm: max_iter must be >= 1");
  if (w.isZero(0.0)) return 0.0;

  // Two independent starts guard against a start block that is (nearly)
  // orthogonal to the top singular directions, where a single run converges
  // cleanly to a smaller singular value.
  auto gen = rng::stream(0, "spectral-restart");
  std::normal_distribution<double> gauss(0.0, 1.0);
  int block = w.cols() > 1 ? 2 : 1;

  Matrix v0(w.cols(), block);
  v0.col(0).setOnes();
  if (block == 2)
    for (Eigen::Index i = 0; i < w.cols(); ++i) v0(i, 1) = gauss(gen);
  auto [lambda_a, ok_a] = power_iterate(w, v0, tol, max_iter);

  Matrix vr(w.cols(), block);
  for (Eigen::Index i = 0; i < vr.rows(); ++i)
    for (int c = 0; c < block; ++c) vr(i, c) = gauss(gen);
  auto [lambda_b, ok_b] = power_iterate(w, vr, tol, max_iter);

  if (!ok_a && !ok_b) {
    std::ostringstream msg;
    msg << "spectral_norm: power iteration did not converge after " << max_iter
        << " iterations from either start (last estimate "
        << std::sqrt(std::max(lambda_b, 0.0)) << ", last change above tol "
        << tol << ")";
    throw numeric_error(msg.str());
  }
  double lambda = std::max(ok_a ? lambda_a : 0.0, ok_b ? lambda_b : 0.0);
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace specbound
