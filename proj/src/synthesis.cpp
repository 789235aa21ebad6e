#include "hiersim/synthesis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hiersim/errors.hpp"
#include "hiersim/matkit.hpp"
#include "hiersim/rng.hpp"

namespace hiersim {

namespace {

void require_spd(const Matrix& W, const char* what) {
  if (!is_symmetric(W)) throw std::invalid_argument(std::string(what) + " not symmetric");
  if (matkit::lambda_min_sym(W) <= 0.0) {
    throw std::invalid_argument(std::string(what) + " not positive definite");
  }
}

}  // namespace

Matrix compute_gain(const LinearSystem& sys1, const Matrix& state_weight,
                    const Matrix& input_weight) {
  sys1.validate("compute_gain: sys1");
  const Eigen::Index n = sys1.n();
  const Eigen::Index p = sys1.p();
  if (state_weight.rows() != n || state_weight.cols() != n) {
    throw std::invalid_argument("compute_gain: state_weight dimension mismatch");
  }
  if (input_weight.rows() != p || input_weight.cols() != p) {
    throw std::invalid_argument("compute_gain: input_weight dimension mismatch");
  }
  require_spd(state_weight, "compute_gain: state_weight");
  require_spd(input_weight, "compute_gain: input_weight");

  const Matrix& A = sys1.A;
  const Matrix& B = sys1.B;
  const Matrix At = A.transpose();
  const Matrix Rinv = input_weight.llt().solve(Matrix::Identity(p, p));
  const Matrix BRBt = B * Rinv * B.transpose();

  // Backward Riccati flow from the zero terminal condition; the steady
  // state is the stabilizing solution.
  constexpr double kStep = 1e-3;
  constexpr long kMaxIters = 500000;
  Matrix Pk = Matrix::Zero(n, n);
  bool converged = false;
  for (long i = 0; i < kMaxIters; ++i) {
    const Matrix Pdot = At * Pk + Pk * A - Pk * BRBt * Pk + state_weight;
    Matrix Pn = Pk + kStep * Pdot;
    Pn = 0.5 * (Pn + Pn.transpose()).eval();
    const double delta = (Pn - Pk).norm();
    Pk = Pn;
    if (!Pk.allFinite() || Pk.trace() > 1e8) {
      throw NotStabilizable("compute_gain: Riccati flow diverged");
    }
    if (delta < 1e-10) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NotStabilizable("compute_gain: Riccati flow did not settle");
  }
  const Matrix K = -Rinv * B.transpose() * Pk;
  if (!matkit::is_hurwitz(A + B * K)) {
    throw NotStabilizable("compute_gain: closed loop not Hurwitz");
  }
  return K;
}

double max_decay_rate(const Matrix& A_cl) {
  require_finite(A_cl, "max_decay_rate: A_cl");
  const Eigen::Index n = A_cl.rows();
  const Matrix I = Matrix::Identity(n, n);
  if (!matkit::is_hurwitz(A_cl)) {
    throw NotHurwitz("max_decay_rate: closed loop not Hurwitz");
  }
  double lo = 0.0;
  double hi = 1e3;
  if (matkit::is_hurwitz(A_cl + hi * I)) return hi;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (matkit::is_hurwitz(A_cl + mid * I)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::pair<Matrix, double> compute_M(const LinearSystem& sys1, const Matrix& K,
                                    double lambda) {
  sys1.validate("compute_M: sys1");
  const Eigen::Index n = sys1.n();
  if (K.rows() != sys1.p() || K.cols() != n) {
    throw std::invalid_argument("compute_M: K dimension mismatch");
  }
  const Matrix A_cl = sys1.A + sys1.B * K;
  const Matrix I = Matrix::Identity(n, n);
  if (!(lambda > 0.0) || !matkit::is_hurwitz(A_cl + 1.01 * lambda * I)) {
    throw DecayTooLarge("compute_M: lambda exceeds the closed loop's decay margin");
  }

  const Matrix CtC = sys1.C.transpose() * sys1.C;
  const Matrix M0 = matkit::solve_lyapunov(A_cl + lambda * I, CtC + 1e-6 * I);
  const Matrix S0 = matkit::sqrtm_spd(M0);
  const Matrix S0inv = S0.llt().solve(I);
  // Smallest scaling that dominates C1^T C1; the decrease condition is
  // homogeneous in M, so scaling preserves it.
  const double alpha =
      std::max(1.0, matkit::lambda_max_sym(S0inv * CtC * S0inv));
  Matrix M = alpha * M0;
  M = 0.5 * (M + M.transpose()).eval();
  return {M, matkit::lambda_max_sym(M)};
}

std::pair<Matrix, Matrix> solve_PQ(const LinearSystem& sys1,
                                   const LinearSystem& sys2) {
  sys1.validate("solve_PQ: sys1");
  sys2.validate("solve_PQ: sys2");
  if (sys1.m() != sys2.m()) {
    throw std::invalid_argument("solve_PQ: output dimensions differ");
  }
  const Eigen::Index n1 = sys1.n(), n2 = sys2.n(), p1 = sys1.p(), m = sys1.m();
  const Matrix In1 = Matrix::Identity(n1, n1);
  const Matrix In2 = Matrix::Identity(n2, n2);

  // Unknowns [vec(P); vec(Q)], column-major. Rows: the dynamics equation
  // A1 P - P A2 + B1 Q = 0 stacked over the output equation C1 P = C2.
  const Eigen::Index rows_dyn = n1 * n2;
  const Eigen::Index rows_out = m * n2;
  const Eigen::Index cols_P = n1 * n2;
  const Eigen::Index cols_Q = p1 * n2;
  Matrix L = Matrix::Zero(rows_dyn + rows_out, cols_P + cols_Q);
  L.block(0, 0, rows_dyn, cols_P) =
      matkit::kron(In2, sys1.A) - matkit::kron(sys2.A.transpose(), In1);
  L.block(0, cols_P, rows_dyn, cols_Q) = matkit::kron(In2, sys1.B);
  L.block(rows_dyn, 0, rows_out, cols_P) = matkit::kron(In2, sys1.C);

  Vector rhs = Vector::Zero(rows_dyn + rows_out);
  const Matrix C2 = sys2.C;
  rhs.segment(rows_dyn, rows_out) = Eigen::Map<const Vector>(C2.data(), rows_out);

  const Matrix sol = matkit::least_squares(L, rhs);
  Matrix P(n1, n2), Q(p1, n2);
  for (Eigen::Index j = 0; j < n2; ++j) {
    P.col(j) = sol.block(j * n1, 0, n1, 1);
    Q.col(j) = sol.block(cols_P + j * p1, 0, p1, 1);
  }

  const double res_dyn = (P * sys2.A - sys1.A * P - sys1.B * Q).norm();
  const double res_out = (sys1.C * P - sys2.C).norm();
  const double tol = 1e-8 * (1.0 + matkit::spectral_norm(sys2.A) +
                             matkit::spectral_norm(sys2.C));
  if (res_dyn + res_out > tol) {
    throw NoExactEmbedding("solve_PQ: no exact (P, Q) embedding for this pair");
  }
  return {P, Q};
}

Matrix compute_R(const Matrix& sqrtM, const Matrix& B1, const Matrix& P,
                 const Matrix& B2) {
  if (sqrtM.rows() != B1.rows() || P.rows() != B1.rows() ||
      P.cols() != B2.rows()) {
    throw std::invalid_argument("compute_R: dimension mismatch");
  }
  return matkit::least_squares(sqrtM * B1, sqrtM * P * B2);
}

GammaCoefficients gamma_coefficients(const RobustCertificate& cert,
                                     const LinearSystem& sys1,
                                     const LinearSystem& sys2,
                                     const std::optional<Matrix>& Bd) {
  if (!(cert.lambda > 0.0)) {
    throw std::invalid_argument("gamma_coefficients: lambda must be positive");
  }
  GammaCoefficients g;
  g.c_input =
      matkit::spectral_norm(cert.sqrtM * (sys1.B * cert.R - cert.P * sys2.B)) /
      cert.lambda;
  if (Bd && Bd->size() > 0) {
    g.c_dist = matkit::spectral_norm(cert.sqrtM * (*Bd)) / cert.lambda;
  }
  return g;
}

double simulation_value(const RobustCertificate& cert, const Vector& x1,
                        const Vector& x2) {
  const Vector e = x1 - cert.P * x2;
  const double v = e.dot(cert.M * e);
  return std::sqrt(std::max(0.0, v));
}

Vector interface_control(const RobustCertificate& cert, const Vector& u2,
                         const Vector& x1, const Vector& x2) {
  return cert.R * u2 + cert.Q * x2 + cert.K * (x1 - cert.P * x2);
}

double error_bound(const RobustCertificate& cert, double V0, double u2_max,
                   const DisturbanceSpec& spec) {
  if (!std::isfinite(V0) || V0 < 0.0) {
    throw InvalidSpec("error_bound: V0 must be finite and non-negative");
  }
  if (!std::isfinite(u2_max) || u2_max < 0.0) {
    throw InvalidSpec("error_bound: u2_max must be finite and non-negative");
  }
  const double nominal = std::max(V0, cert.c_input * u2_max);
  switch (spec.kind) {
    case DisturbanceKind::None:
      return nominal;
    case DisturbanceKind::Bounded:
      if (!std::isfinite(spec.d_max) || spec.d_max < 0.0) {
        throw InvalidSpec("error_bound: d_max must be finite and non-negative");
      }
      return std::max(V0, cert.c_dist * spec.d_max + cert.c_input * u2_max);
    case DisturbanceKind::Impulse: {
      if (!std::isfinite(spec.b_max) || spec.b_max < 0.0) {
        throw InvalidSpec("error_bound: b_max must be finite and non-negative");
      }
      if (!(spec.t_dwell > 0.0)) {
        throw InvalidSpec("error_bound: t_dwell must be positive");
      }
      const double factor = std::max(1.0, 1.0 / (spec.t_dwell * cert.lambda));
      return nominal + factor * spec.b_max * std::sqrt(cert.lambda_max_M);
    }
  }
  throw InvalidSpec("error_bound: unknown disturbance kind");
}

double impulse_series_limit(double t_dwell_lambda) {
  if (!(t_dwell_lambda > 0.0) || t_dwell_lambda > 1.0) {
    throw std::invalid_argument("impulse_series_limit: argument must be in (0, 1]");
  }
  double cur = 1.0;
  for (long i = 0; i < 200000000L; ++i) {
    const double next = cur + 1.0 - t_dwell_lambda * cur;
    if (std::abs(next - cur) < 1e-12) return next;
    cur = next;
  }
  return cur;
}

VerifyReport verify_certificate(const RobustCertificate& cert,
                                const LinearSystem& sys1,
                                const LinearSystem& sys2, int n_samples,
                                std::uint64_t rng_seed,
                                const std::optional<Matrix>& Bd) {
  sys1.validate("verify_certificate: sys1");
  sys2.validate("verify_certificate: sys2");
  VerifyReport report;

  const Matrix CtC = sys1.C.transpose() * sys1.C;
  report.min_eig_M_minus_CtC = matkit::lambda_min_sym(cert.M - CtC);

  const Matrix A_cl = sys1.A + sys1.B * cert.K;
  const Matrix lhs = A_cl.transpose() * cert.M + cert.M * A_cl +
                     2.0 * cert.lambda * cert.M;
  report.max_eig_decrease = matkit::lambda_max_sym(0.5 * (lhs + lhs.transpose()));

  report.residual_dynamics =
      (cert.P * sys2.A - sys1.A * cert.P - sys1.B * cert.Q).norm();
  report.residual_output = (sys1.C * cert.P - sys2.C).norm();

  // Sampled strict decrease: draw tuples with
  // gamma_1(||d||) + gamma_2(||u2||) < V * (1 - 1e-3) and check the exact
  // directional derivative of V along the interfaced closed loop.
  const Eigen::Index n1 = sys1.n(), n2 = sys2.n(), p2 = sys2.p();
  const Matrix Bmis = sys1.B * cert.R - cert.P * sys2.B;
  const double c_input = cert.c_input;
  const double c_dist = (Bd && Bd->size() > 0) ? cert.c_dist : 0.0;
  Rng rng(rng_seed);
  report.worst_derivative = -std::numeric_limits<double>::infinity();
  int accepted = 0;
  int attempts = 0;
  while (accepted < n_samples && attempts < 100 * n_samples) {
    ++attempts;
    const Vector x2 = rng.normal_vector(n2);
    const Vector e = rng.normal_vector(n1);
    const double V = std::sqrt(std::max(0.0, e.dot(cert.M * e)));
    if (V < 1e-9) continue;
    const Vector x1 = cert.P * x2 + e;

    const double budget = V * (1.0 - 1e-3) * rng.uniform();
    const double share = rng.uniform();
    Vector u2 = Vector::Zero(p2);
    if (p2 > 0) {
      const double s_u = (Bd && Bd->size() > 0) ? share * budget : budget;
      const double mag = c_input > 1e-300 ? s_u / c_input : 10.0 * rng.uniform();
      u2 = mag * rng.direction(p2);
    }
    Vector dist_term = Vector::Zero(n1);
    if (Bd && Bd->size() > 0) {
      const double s_d = p2 > 0 ? (1.0 - share) * budget : budget;
      const double mag = c_dist > 1e-300 ? s_d / c_dist : 10.0 * rng.uniform();
      const Vector d = mag * rng.direction(Bd->cols());
      dist_term = (*Bd) * d;
    }

    const Vector edot = A_cl * e + Bmis * u2 + dist_term;
    const double dVdt = e.dot(cert.M * edot) / V;
    ++accepted;
    if (dVdt >= 0.0) ++report.decrease_violations;
    if (dVdt > report.worst_derivative) report.worst_derivative = dVdt;
  }
  report.samples = accepted;
  return report;
}

RobustCertificate synthesize_certificate(const LinearSystem& sys1,
                                         const LinearSystem& sys2,
                                         const SynthesisOptions& opts) {
  sys1.validate("synthesize: sys1");
  sys2.validate("synthesize: sys2");
  if (sys1.m() != sys2.m()) {
    throw std::invalid_argument("synthesize: output dimensions differ");
  }

  RobustCertificate cert;
  if (opts.K) {
    cert.K = *opts.K;
    if (cert.K.rows() != sys1.p() || cert.K.cols() != sys1.n()) {
      throw std::invalid_argument("synthesize: K dimension mismatch");
    }
  } else {
    const Matrix Qw = opts.state_weight
                          ? *opts.state_weight
                          : Matrix::Identity(sys1.n(), sys1.n()).eval();
    const Matrix Rw = opts.input_weight
                          ? *opts.input_weight
                          : Matrix::Identity(sys1.p(), sys1.p()).eval();
    cert.K = compute_gain(sys1, Qw, Rw);
  }

  const Matrix A_cl = sys1.A + sys1.B * cert.K;
  const double decay = max_decay_rate(A_cl);
  cert.lambda = opts.lambda ? std::min(*opts.lambda, 0.9 * decay) : 0.9 * decay;

  auto [M, lmax] = compute_M(sys1, cert.K, cert.lambda);
  cert.M = std::move(M);
  cert.lambda_max_M = lmax;
  cert.sqrtM = matkit::sqrtm_spd(cert.M);

  if (opts.P || opts.Q) {
    if (!(opts.P && opts.Q)) {
      throw std::invalid_argument("synthesize: P and Q overrides come together");
    }
    cert.P = *opts.P;
    cert.Q = *opts.Q;
    const double res = (cert.P * sys2.A - sys1.A * cert.P - sys1.B * cert.Q).norm() +
                       (sys1.C * cert.P - sys2.C).norm();
    const double tol = 1e-8 * (1.0 + matkit::spectral_norm(sys2.A) +
                               matkit::spectral_norm(sys2.C));
    if (res > tol) {
      throw NoExactEmbedding("synthesize: supplied (P, Q) violate the embedding");
    }
  } else {
    auto [P, Q] = solve_PQ(sys1, sys2);
    cert.P = std::move(P);
    cert.Q = std::move(Q);
  }

  cert.R = opts.R ? *opts.R : compute_R(cert.sqrtM, sys1.B, cert.P, sys2.B);
  if (cert.R.rows() != sys1.p() || cert.R.cols() != sys2.p()) {
    throw std::invalid_argument("synthesize: R dimension mismatch");
  }

  const GammaCoefficients g = gamma_coefficients(cert, sys1, sys2, opts.Bd);
  cert.c_dist = g.c_dist;
  cert.c_input = g.c_input;
  return cert;
}

}  // namespace hiersim
