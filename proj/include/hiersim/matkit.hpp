#pragma once

#include <utility>

#include <Eigen/Dense>

#include "hiersim/types.hpp"

// Dense kernel for the small matrices (n <= ~20) this project works with.
namespace hiersim::matkit {

Matrix kron(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B);

// Solves A^T X + X A = -Qs by vectorizing to an n^2 x n^2 dense system.
// Qs must be symmetric (relative tolerance 1e-10); the result is
// symmetrized by averaging. Throws SingularSystem when the spectrum of A
// makes the vectorized system rank-deficient (lambda_i + lambda_j = 0 for
// some pair, e.g. A not Hurwitz with mirrored eigenvalues) or the residual
// exceeds 1e-8 * (1 + ||Qs||_F).
Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& A,
                      const Eigen::Ref<const Matrix>& Qs);

// Eigenvalues ascending, orthonormal eigenvectors as matching columns.
std::pair<Vector, Matrix> sym_eig(const Eigen::Ref<const Matrix>& S);

double lambda_min_sym(const Eigen::Ref<const Matrix>& S);
double lambda_max_sym(const Eigen::Ref<const Matrix>& S);

// Symmetric positive definite square root. Throws NotPositiveDefinite when
// lambda_min(M) <= 1e-12.
Matrix sqrtm_spd(const Eigen::Ref<const Matrix>& M);

// Induced 2-norm, sqrt(lambda_max(A^T A)).
double spectral_norm(const Eigen::Ref<const Matrix>& A);

// Lyapunov stability test: true iff solve_lyapunov(A, I) yields a positive
// definite solution. Rank deficiency maps to false.
bool is_hurwitz(const Eigen::Ref<const Matrix>& A);

// Minimum-Frobenius-norm X minimizing ||A X - B||_F, via eigendecomposition
// of A^T A with pseudo-inversion threshold 1e-10 * lambda_max.
Matrix least_squares(const Eigen::Ref<const Matrix>& A,
                     const Eigen::Ref<const Matrix>& B);

}  // namespace hiersim::matkit
