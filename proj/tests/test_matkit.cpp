#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hiersim/errors.hpp"
#include "hiersim/matkit.hpp"
#include "hiersim/rng.hpp"
#include "support/oracles.hpp"

using namespace hiersim;
namespace mk = hiersim::matkit;

namespace {

Matrix random_hurwitz(Rng& rng, Eigen::Index n) {
  const Matrix R = rng.normal_matrix(n, n);
  return R - (mk::spectral_norm(R) + 0.5) * Matrix::Identity(n, n);
}

Matrix random_spd(Rng& rng, Eigen::Index n) {
  const Matrix R = rng.normal_matrix(n, n);
  return R.transpose() * R + 0.1 * Matrix::Identity(n, n);
}

}  // namespace

TEST_CASE("solve_lyapunov on worked scalar and 2x2 instances") {
  Matrix A(1, 1), Q(1, 1);
  A << -1.0;
  Q << 2.0;
  CHECK(mk::solve_lyapunov(A, Q)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK((mk::solve_lyapunov(-Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2)) -
         Matrix::Identity(2, 2))
            .norm() < 1e-12);

  Matrix A2(2, 2);
  A2 << 0, 1, -2, -3;
  Matrix X = mk::solve_lyapunov(A2, Matrix::Identity(2, 2));
  Matrix expected(2, 2);
  expected << 1.25, 0.25, 0.25, 0.25;  // hand solve of the 3-unknown system
  CHECK((X - expected).norm() < 1e-10);
}

TEST_CASE("solve_lyapunov rejects asymmetric Qs and singular pencils") {
  Matrix A(2, 2), Qbad(2, 2);
  A << -1, 0, 0, -2;
  Qbad << 1, 0.5, 0.0, 1;
  CHECK_THROWS_AS(mk::solve_lyapunov(A, Qbad), NotSymmetric);

  // Mirrored eigenvalues +1/-1 make lambda_i + lambda_j = 0.
  Matrix Amirror(2, 2);
  Amirror << 1, 0, 0, -1;
  CHECK_THROWS_AS(mk::solve_lyapunov(Amirror, Matrix::Identity(2, 2)),
                  SingularSystem);
}

TEST_CASE("solve_lyapunov round-trip on random Hurwitz instances") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    const Matrix A = random_hurwitz(rng, n);
    const Matrix Q = random_spd(rng, n);
    const Matrix X = mk::solve_lyapunov(A, Q);
    CHECK((A.transpose() * X + X * A + Q).norm() <= 1e-8 * (1.0 + Q.norm()));
    CHECK(mk::lambda_min_sym(X) > 0.0);
  }
}

TEST_CASE("solve_lyapunov matches the brute-force reference") {
  Rng rng(202);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    const Matrix A = random_hurwitz(rng, n);
    Matrix Q = random_spd(rng, n);
    Q = 0.5 * (Q + Q.transpose()).eval();
    const Matrix X = mk::solve_lyapunov(A, Q);
    const Matrix Y = oracles::lyapunov_bruteforce(A, Q);
    CHECK((X - Y).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sym_eig fixed values") {
  const auto [d1, v1] = mk::sym_eig((Matrix(2, 2) << 3, 0, 0, 1).finished());
  CHECK(d1(0) == doctest::Approx(1.0));
  CHECK(d1(1) == doctest::Approx(3.0));
  CHECK(std::abs(v1.col(0)(1)) == doctest::Approx(1.0));

  const auto [d2, v2] = mk::sym_eig(Matrix::Identity(3, 3));
  CHECK((d2 - Vector::Ones(3)).norm() < 1e-14);

  Matrix S(2, 2);
  S << 2, 1, 1, 2;
  const auto [d3, v3] = mk::sym_eig(S);  // characteristic poly: (2-l)^2 = 1
  CHECK(d3(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d3(1) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sym_eig reconstruction and orthogonality on random symmetric input") {
  Rng rng(303);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 8;
    Matrix S = rng.normal_matrix(n, n);
    S = 0.5 * (S + S.transpose()).eval();
    const auto [vals, vecs] = mk::sym_eig(S);
    CHECK((vecs * vals.asDiagonal() * vecs.transpose() - S).norm() < 1e-8);
    CHECK((vecs.transpose() * vecs - Matrix::Identity(n, n)).norm() < 1e-9);
    for (Eigen::Index i = 0; i + 1 < n; ++i) CHECK(vals(i) <= vals(i + 1));
    CHECK((S * vecs.col(0) - vals(0) * vecs.col(0)).norm() <=
          1e-9 * (1.0 + S.norm()));
  }
  CHECK_THROWS_AS(mk::sym_eig((Matrix(2, 2) << 0, 1, 0, 0).finished()),
                  NotSymmetric);
}

TEST_CASE("sqrtm_spd basics and idempotence") {
  CHECK((mk::sqrtm_spd(Matrix::Identity(2, 2)) - Matrix::Identity(2, 2)).norm() <
        1e-13);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 4.0;
  D(1, 1) = 9.0;
  Matrix S = mk::sqrtm_spd(D);
  CHECK(S(0, 0) == doctest::Approx(2.0));
  CHECK(S(1, 1) == doctest::Approx(3.0));

  Rng rng(404);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    const Matrix M = random_spd(rng, n);
    const Matrix R = mk::sqrtm_spd(M);
    CHECK((R * R - M).norm() <= 1e-9 * (1.0 + M.norm()));
    // sqrt of the square recovers the SPD root
    const Matrix R2 = mk::sqrtm_spd(R * R);
    CHECK((R2 - R).norm() < 1e-8 * (1.0 + R.norm()));
  }

  Matrix psd = Matrix::Zero(2, 2);
  psd(0, 0) = 1.0;  // singular
  CHECK_THROWS_AS(mk::sqrtm_spd(psd), NotPositiveDefinite);
}

TEST_CASE("spectral_norm fixed values and submultiplicativity") {
  CHECK(mk::spectral_norm(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = -4.0;
  CHECK(mk::spectral_norm(D) == doctest::Approx(4.0));
  Matrix N(2, 2);
  N << 0, 2, 0, 0;
  CHECK(mk::spectral_norm(N) == doctest::Approx(2.0));

  Rng rng(505);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix A = rng.normal_matrix(3, 4);
    const Matrix B = rng.normal_matrix(4, 2);
    CHECK(mk::spectral_norm(A * B) <=
          mk::spectral_norm(A) * mk::spectral_norm(B) + 1e-9);
  }
}

TEST_CASE("is_hurwitz fixed cases") {
  CHECK(mk::is_hurwitz((Matrix(1, 1) << -1).finished()));
  CHECK_FALSE(mk::is_hurwitz((Matrix(1, 1) << 1).finished()));
  Matrix A(2, 2);
  A << 0, 1, -1, -1;  // eigenvalues -0.5 +- i sqrt(3)/2
  CHECK(mk::is_hurwitz(A));
  CHECK_FALSE(mk::is_hurwitz(Matrix::Zero(2, 2)));
}

TEST_CASE("is_hurwitz agrees with the quadratic formula on random 2x2") {
  Rng rng(606);
  int decided = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix A = rng.normal_matrix(2, 2);
    const double tr = A.trace();
    const double det = A.determinant();
    const double disc = 0.25 * tr * tr - det;
    double max_re;
    if (disc >= 0.0) {
      max_re = 0.5 * tr + std::sqrt(disc);
    } else {
      max_re = 0.5 * tr;
    }
    if (std::abs(max_re) < 1e-6) continue;  // too close to the axis to call
    ++decided;
    CHECK(mk::is_hurwitz(A) == (max_re < 0.0));
  }
  CHECK(decided > 150);
}

TEST_CASE("least_squares fixed cases") {
  const Matrix B = (Matrix(2, 2) << 1, 2, 3, 4).finished();
  CHECK((mk::least_squares(Matrix::Identity(2, 2), B) - B).norm() < 1e-12);

  Matrix A(2, 1), b(2, 1);
  A << 1, 1;
  b << 1, 3;
  CHECK(mk::least_squares(A, b)(0, 0) == doctest::Approx(2.0));

  // Minimum-norm pick on the solution line x1 + x2 = 2.
  Matrix A2(2, 2), b2(2, 1);
  A2 << 1, 1, 0, 0;
  b2 << 2, 0;
  const Matrix X = mk::least_squares(A2, b2);
  CHECK(X(0, 0) == doctest::Approx(1.0));
  CHECK(X(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("least_squares solves consistent systems and picks minimum norm") {
  Rng rng(707);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix A = rng.normal_matrix(4, 2);
    const Matrix X0 = rng.normal_matrix(2, 3);
    const Matrix X = mk::least_squares(A, A * X0);
    CHECK((A * X - A * X0).norm() < 1e-9 * (1.0 + X0.norm()));
  }
}
