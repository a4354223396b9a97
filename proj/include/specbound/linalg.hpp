#pragma once

#include <Eigen/Dense>

namespace specbound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Throws usage_error if the matrix is empty or contains NaN/Inf entries.
void check_finite(const Matrix& w, const char* name = "matrix");
void check_finite(const Vector& v, const char* name = "vector");

/// Largest singular value of w, via power iteration on the Gram operator
/// v -> Wᵀ(Wv). Deterministic: the start vector is the normalized all-ones
/// vector, with one restart from a fixed pseudo-random vector if the Rayleigh
/// estimate stalls above tol. Returns 0 for the zero matrix.
/// Throws numeric_error on non-convergence after restarts are exhausted.
double spectral_norm(const Matrix& w, double tol = 1e-10, int max_iter = 1000);

/// √(Σ entries²).
double frobenius_norm(const Matrix& w);

}  // namespace specbound
