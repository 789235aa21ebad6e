#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "hiersim/types.hpp"

namespace hiersim {

enum class DisturbanceKind { None, Bounded, Impulse };

/// Bound-side disturbance description.
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::None;
  double d_max = 0.0;   // bounded: ||d||_inf bound
  double b_max = 0.0;   // impulse: bound on ||B_d||
  double t_dwell = 0.0; // impulse: minimum spacing between events, seconds
};

/// Everything needed to run the interfaced hierarchy and evaluate its
/// output-error bounds: gain K, decay rate lambda, the quadratic form M
/// with its square root and top eigenvalue, the embedding (P, Q), the
/// feedforward R, and the gamma-slope coefficients
///   c_dist  = ||sqrt(M) B_d|| / lambda          (bounded-disturbance slope)
///   c_input = ||sqrt(M) (B1 R - P B2)|| / lambda (abstract-input slope).
struct RobustCertificate {
  Matrix K;
  double lambda = 0.0;
  Matrix M;
  Matrix sqrtM;
  double lambda_max_M = 0.0;
  Matrix P;
  Matrix Q;
  Matrix R;
  double c_dist = 0.0;
  double c_input = 0.0;
};

// LQR gain from the Riccati matrix ODE integrated backward (step 1e-3)
// until successive iterates differ by < 1e-10. Throws NotStabilizable on
// divergence (trace > 1e8) or a non-Hurwitz closed loop.
Matrix compute_gain(const LinearSystem& sys1, const Matrix& state_weight,
                    const Matrix& input_weight);

// Largest shift lambda with A_cl + lambda*I still Hurwitz, by bisection
// over [0, 1e3] down to width 1e-6. Throws NotHurwitz if A_cl is not.
double max_decay_rate(const Matrix& A_cl);

// Quadratic-form matrix for the given gain and decay rate:
// M0 solves the shifted Lyapunov equation with right-hand side
// C1^T C1 + 1e-6 I, then M = alpha * M0 with
// alpha = max(1, lambda_max(M0^-1/2 C1^T C1 M0^-1/2)). Returns (M,
// lambda_max(M)). Throws DecayTooLarge unless A_cl + 1.01*lambda*I is
// Hurwitz.
std::pair<Matrix, double> compute_M(const LinearSystem& sys1, const Matrix& K,
                                    double lambda);

// Minimum-norm (P, Q) with P A2 = A1 P + B1 Q and C2 = C1 P. Throws
// NoExactEmbedding when the combined residual exceeds
// 1e-8 * (1 + ||A2|| + ||C2||).
std::pair<Matrix, Matrix> solve_PQ(const LinearSystem& sys1,
                                   const LinearSystem& sys2);

// Feedforward matrix minimizing ||sqrt(M)(B1 R - P B2)||_F.
Matrix compute_R(const Matrix& sqrtM, const Matrix& B1, const Matrix& P,
                 const Matrix& B2);

struct GammaCoefficients {
  double c_dist = 0.0;
  double c_input = 0.0;
};

// Slopes of the gamma functions. Requires M/sqrtM, lambda, P, R populated.
// Without a disturbance map, c_dist is 0. In the impulse regime the bound
// takes gamma_1 as the identity, so c_dist is informational there.
GammaCoefficients gamma_coefficients(const RobustCertificate& cert,
                                     const LinearSystem& sys1,
                                     const LinearSystem& sys2,
                                     const std::optional<Matrix>& Bd);

// V(x1, x2) = sqrt((x1 - P x2)^T M (x1 - P x2)).
double simulation_value(const RobustCertificate& cert, const Vector& x1,
                        const Vector& x2);

// u1 = R u2 + Q x2 + K (x1 - P x2).
Vector interface_control(const RobustCertificate& cert, const Vector& u2,
                         const Vector& x1, const Vector& x2);

// Certified sup_t ||y1 - y2||:
//   none:    max{V0, c_input * u2_max}
//   bounded: max{V0, c_dist * d_max + c_input * u2_max}
//   impulse: max{V0, c_input * u2_max}
//            + max{1, 1/(t_dwell * lambda)} * b_max * sqrt(lambda_max_M)
// Throws InvalidSpec on negative magnitudes or non-positive dwell time.
double error_bound(const RobustCertificate& cert, double V0, double u2_max,
                   const DisturbanceSpec& spec);

// Limit of X_1 = 1, X_{i+1} = X_i + 1 - x * X_i, iterated until
// |X_{i+1} - X_i| < 1e-12. Equals 1/x for x in (0, 1].
double impulse_series_limit(double t_dwell_lambda);

struct VerifyReport {
  // matrix conditions
  double min_eig_M_minus_CtC = 0.0;  // >= -1e-8
  double max_eig_decrease = 0.0;     // <= 1e-8
  double residual_dynamics = 0.0;    // <= 1e-8
  double residual_output = 0.0;      // <= 1e-8
  // sampled strict-decrease condition
  int samples = 0;
  int decrease_violations = 0;
  double worst_derivative = 0.0;  // max dV/dt over admissible samples

  bool cond_output_bound() const { return min_eig_M_minus_CtC >= -1e-8; }
  bool cond_decrease_lmi() const { return max_eig_decrease <= 1e-8; }
  bool cond_dynamics() const { return residual_dynamics <= 1e-8; }
  bool cond_output_match() const { return residual_output <= 1e-8; }
  bool cond_sampled_decrease() const { return decrease_violations == 0; }
  bool pass() const {
    return cond_output_bound() && cond_decrease_lmi() && cond_dynamics() &&
           cond_output_match() && cond_sampled_decrease();
  }
};

// Checks the four matrix conditions of the certificate, then samples
// n_samples admissible (x1, x2, u2, d) tuples (gamma budget strictly inside
// V) and evaluates the analytic directional derivative of V along the
// interfaced closed loop. Failures land in the report, never as exceptions.
// Bd is the disturbance channel used for the gamma_1 term; omit for the
// undisturbed check.
VerifyReport verify_certificate(const RobustCertificate& cert,
                                const LinearSystem& sys1,
                                const LinearSystem& sys2, int n_samples,
                                std::uint64_t rng_seed,
                                const std::optional<Matrix>& Bd = std::nullopt);

struct SynthesisOptions {
  std::optional<Matrix> K;
  std::optional<double> lambda;  // effective lambda = min(value, 0.9 * max decay)
  std::optional<Matrix> P;
  std::optional<Matrix> Q;
  std::optional<Matrix> R;
  std::optional<Matrix> state_weight;  // LQR weights when K is synthesized
  std::optional<Matrix> input_weight;
  std::optional<Matrix> Bd;  // disturbance map for c_dist
};

// Full pipeline: gain, decay rate, M, (P, Q), R, gamma coefficients.
RobustCertificate synthesize_certificate(const LinearSystem& sys1,
                                         const LinearSystem& sys2,
                                         const SynthesisOptions& opts = {});

}  // namespace hiersim
