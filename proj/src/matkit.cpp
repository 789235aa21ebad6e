#include "hiersim/matkit.hpp"

#include <cmath>
#include <stdexcept>

#include "hiersim/errors.hpp"

namespace hiersim::matkit {

Matrix kron(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& A,
                      const Eigen::Ref<const Matrix>& Qs) {
  require_finite(A, "solve_lyapunov: A");
  require_finite(Qs, "solve_lyapunov: Qs");
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("solve_lyapunov: A not square");
  if (Qs.rows() != n || Qs.cols() != n) {
    throw std::invalid_argument("solve_lyapunov: Qs dimension mismatch");
  }
  if (!is_symmetric(Qs)) throw NotSymmetric("solve_lyapunov: Qs not symmetric");

  // vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X), column-major vec.
  const Matrix At = A.transpose();
  const Matrix L = kron(Matrix::Identity(n, n), At) + kron(At, Matrix::Identity(n, n));
  Eigen::FullPivLU<Matrix> lu(L);
  if (lu.rank() < n * n) {
    throw SingularSystem("solve_lyapunov: vectorized system is rank-deficient");
  }
  const Matrix Qm = Qs;
  const Vector rhs = -Eigen::Map<const Vector>(Qm.data(), n * n);
  const Vector x = lu.solve(rhs);
  Matrix X = Eigen::Map<const Matrix>(x.data(), n, n);
  X = 0.5 * (X + X.transpose()).eval();

  const double resid = (At * X + X * A + Qm).norm();
  if (!(resid <= 1e-8 * (1.0 + Qm.norm()))) {
    throw SingularSystem("solve_lyapunov: residual too large (ill-conditioned system)");
  }
  return X;
}

std::pair<Vector, Matrix> sym_eig(const Eigen::Ref<const Matrix>& S) {
  require_finite(S, "sym_eig: S");
  if (S.rows() != S.cols()) throw std::invalid_argument("sym_eig: S not square");
  if (!is_symmetric(S)) throw NotSymmetric("sym_eig: S not symmetric");
  const Matrix Ssym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Ssym);
  if (es.info() != Eigen::Success) {
    throw SingularSystem("sym_eig: eigendecomposition failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

double lambda_min_sym(const Eigen::Ref<const Matrix>& S) {
  return sym_eig(S).first(0);
}

double lambda_max_sym(const Eigen::Ref<const Matrix>& S) {
  const Vector vals = sym_eig(S).first;
  return vals(vals.size() - 1);
}

Matrix sqrtm_spd(const Eigen::Ref<const Matrix>& M) {
  const auto [vals, vecs] = sym_eig(M);
  if (vals(0) <= 1e-12) {
    throw NotPositiveDefinite("sqrtm_spd: lambda_min <= 1e-12");
  }
  Matrix S = vecs * vals.cwiseSqrt().asDiagonal() * vecs.transpose();
  return 0.5 * (S + S.transpose()).eval();
}

double spectral_norm(const Eigen::Ref<const Matrix>& A) {
  require_finite(A, "spectral_norm: A");
  if (A.size() == 0) return 0.0;
  const Matrix G = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (G + G.transpose()));
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

bool is_hurwitz(const Eigen::Ref<const Matrix>& A) {
  require_finite(A, "is_hurwitz: A");
  if (A.rows() != A.cols()) throw std::invalid_argument("is_hurwitz: A not square");
  try {
    const Matrix X = solve_lyapunov(A, Matrix::Identity(A.rows(), A.rows()));
    return lambda_min_sym(X) > 0.0;
  } catch (const SingularSystem&) {
    return false;
  }
}

Matrix least_squares(const Eigen::Ref<const Matrix>& A,
                     const Eigen::Ref<const Matrix>& B) {
  require_finite(A, "least_squares: A");
  require_finite(B, "least_squares: B");
  if (A.rows() != B.rows()) {
    throw std::invalid_argument("least_squares: row count mismatch");
  }
  const Matrix G = A.transpose() * A;
  const auto [vals, vecs] = sym_eig(G);
  const double lmax = std::max(0.0, vals.maxCoeff());
  const double thresh = 1e-10 * lmax;
  const Vector inv = vals.unaryExpr(
      [thresh](double v) { return v > thresh && v > 0.0 ? 1.0 / v : 0.0; });
  return vecs * inv.asDiagonal() * vecs.transpose() * (A.transpose() * B);
}

}  // namespace hiersim::matkit
