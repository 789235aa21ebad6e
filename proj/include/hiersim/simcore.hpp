#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "hiersim/synthesis.hpp"
#include "hiersim/types.hpp"

namespace hiersim {

/// Piecewise-constant vector signal: values[k] on [k*hold, (k+1)*hold),
/// clamped to the last value afterwards. Empty means identically zero.
struct PiecewiseConstantSignal {
  double hold = 1.0;
  Eigen::Index dim = 0;
  std::vector<Vector> values;

  Vector eval(double t) const;
};

/// Trajectory-side disturbance description.
struct DisturbanceRealization {
  DisturbanceKind kind = DisturbanceKind::None;
  Matrix Bd;                          // n1 x q map; single column for impulses
  PiecewiseConstantSignal signal;     // bounded kind
  std::vector<double> impulse_times;  // ascending, gaps >= t_dwell
};

// Throws InvalidSpec when the realization is inconsistent with the declared
// spec (magnitude above d_max, ||Bd|| above b_max, gaps below t_dwell).
void validate_realization(const DisturbanceRealization& real,
                          const DisturbanceSpec& spec, Eigen::Index n1);

struct ImpulseEvent {
  Eigen::Index step = 0;
  double time = 0.0;            // snapped grid time
  double requested_time = 0.0;  // time in the realization
  double v_before = 0.0;
  double v_after = 0.0;
};

struct Trace {
  double dt = 0.0;
  double eps = 0.0;  // certified bound recorded with the run
  std::vector<double> t;
  std::vector<Vector> x1, x2, u1, u2, y1, y2;
  std::vector<double> V;
  std::vector<std::uint8_t> impulse;  // 1 on rows where a jump was applied
  std::vector<ImpulseEvent> events;

  std::size_t size() const { return t.size(); }
};

using VectorField = std::function<Vector(double, const Vector&)>;
using VectorSignal = std::function<Vector(double)>;

// Classical 4th-order Runge-Kutta step. Throws NonFinite when the result
// leaves the finite range.
Vector step_rk4(const VectorField& f, const Vector& x, double t, double dt);

// Impulse state jump x1 + Bd.
Vector apply_impulse(const Vector& x1, const Matrix& Bd_column);

// Integrates the interfaced pair on a fixed grid: u1 is the interface
// control evaluated at every RK4 stage, bounded disturbances enter the
// concrete field additively, impulse jumps apply between steps at grid
// times (events snapped to the nearest grid point). Rows at impulse steps
// record the post-jump state. Requires dt <= min(0.2/lambda, 1e-2*T).
Trace simulate(const LinearSystem& sys1, const LinearSystem& sys2,
               const RobustCertificate& cert, const VectorSignal& u2,
               const Vector& x1_0, const Vector& x2_0,
               const DisturbanceRealization& realization, double dt, double T,
               double certified_eps);

struct BoundViolation {
  Eigen::Index step = 0;
  double time = 0.0;
  double error = 0.0;
};

struct BoundReport {
  double eps = 0.0;
  double tol = 0.0;  // 1e-6 + 10 * dt^2 integration allowance
  double max_error = 0.0;
  double max_error_time = 0.0;
  double margin = 0.0;  // eps - max_error
  std::vector<BoundViolation> violations;

  bool pass() const { return violations.empty(); }
};

BoundReport check_bound(const Trace& trace, double eps);

// CSV export: header t,x1_*,x2_*,u1_*,u2_*,y1_*,y2_*,V,eps,impulse with one
// row per grid point, 17 significant digits.
void write_trace_csv(const Trace& trace, std::ostream& out);

}  // namespace hiersim
