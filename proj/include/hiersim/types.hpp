#pragma once

#include <string_view>

#include <Eigen/Core>

namespace hiersim {

template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatX<double>;
using Vector = VecX<double>;
using Point2 = Eigen::Vector2d;

enum class SystemRole { Concrete, Abstract };

/// State-space model dx = A x + B u, y = C x.
struct LinearSystem {
  Matrix A;  // n x n
  Matrix B;  // n x p
  Matrix C;  // m x n
  SystemRole role = SystemRole::Concrete;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index p() const { return B.cols(); }
  Eigen::Index m() const { return C.rows(); }

  // Throws std::invalid_argument on inconsistent dimensions or
  // non-finite entries.
  void validate(std::string_view name = "system") const;
};

// Every operation rejects NaN/Inf at the boundary.
void require_finite(const Eigen::Ref<const Matrix>& M, std::string_view what);

bool is_symmetric(const Eigen::Ref<const Matrix>& S, double rel_tol = 1e-10);

}  // namespace hiersim
