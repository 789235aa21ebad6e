#include "hiersim/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include "hiersim/errors.hpp"
#include "hiersim/matkit.hpp"

namespace hiersim {

Vector PiecewiseConstantSignal::eval(double t) const {
  if (values.empty()) return Vector::Zero(dim);
  if (!(hold > 0.0)) return values.back();
  const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(t / hold)));
  return values[std::min(k, values.size() - 1)];
}

void validate_realization(const DisturbanceRealization& real,
                          const DisturbanceSpec& spec, Eigen::Index n1) {
  if (real.kind != spec.kind) {
    throw InvalidSpec("realization kind differs from declared spec");
  }
  switch (real.kind) {
    case DisturbanceKind::None:
      return;
    case DisturbanceKind::Bounded: {
      if (real.Bd.rows() != n1 || real.Bd.cols() == 0) {
        throw InvalidSpec("bounded realization: Bd must be n1 x q");
      }
      for (const Vector& v : real.signal.values) {
        if (v.size() != real.Bd.cols()) {
          throw InvalidSpec("bounded realization: signal dimension mismatch");
        }
        if (v.norm() > spec.d_max * (1.0 + 1e-12) + 1e-15) {
          throw InvalidSpec("bounded realization: signal exceeds d_max");
        }
      }
      return;
    }
    case DisturbanceKind::Impulse: {
      if (real.Bd.rows() != n1 || real.Bd.cols() != 1) {
        throw InvalidSpec("impulse realization: Bd must be a single column");
      }
      if (matkit::spectral_norm(real.Bd) > spec.b_max * (1.0 + 1e-12)) {
        throw InvalidSpec("impulse realization: ||Bd|| exceeds b_max");
      }
      for (std::size_t i = 1; i < real.impulse_times.size(); ++i) {
        if (real.impulse_times[i] - real.impulse_times[i - 1] <
            spec.t_dwell - 1e-12) {
          throw InvalidSpec("impulse realization: dwell time violated");
        }
      }
      return;
    }
  }
}

Vector step_rk4(const VectorField& f, const Vector& x, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
  const Vector k1 = f(t, x);
  const Vector k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
  const Vector k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
  const Vector k4 = f(t + dt, x + dt * k3);
  Vector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NonFinite("step_rk4: state left the finite range");
  return next;
}

Vector apply_impulse(const Vector& x1, const Matrix& Bd_column) {
  if (Bd_column.rows() != x1.size() || Bd_column.cols() != 1) {
    throw std::invalid_argument("apply_impulse: Bd must be a matching column");
  }
  return x1 + Bd_column.col(0);
}

Trace simulate(const LinearSystem& sys1, const LinearSystem& sys2,
               const RobustCertificate& cert, const VectorSignal& u2,
               const Vector& x1_0, const Vector& x2_0,
               const DisturbanceRealization& realization, double dt, double T,
               double certified_eps) {
  sys1.validate("simulate: sys1");
  sys2.validate("simulate: sys2");
  const Eigen::Index n1 = sys1.n(), n2 = sys2.n();
  if (x1_0.size() != n1 || x2_0.size() != n2) {
    throw std::invalid_argument("simulate: initial state dimension mismatch");
  }
  if (!(dt > 0.0) || !(T > 0.0)) {
    throw std::invalid_argument("simulate: dt and T must be positive");
  }
  const double dt_cap = std::min(0.2 / cert.lambda, 1e-2 * T);
  if (dt > dt_cap * (1.0 + 1e-12)) {
    throw GridTooCoarse("simulate: dt must be <= min(0.2/lambda, 1e-2*T)");
  }

  const auto steps = static_cast<Eigen::Index>(std::ceil(T / dt - 1e-9));

  // Impulse events snapped to the nearest grid index.
  std::multimap<Eigen::Index, double> jumps;
  if (realization.kind == DisturbanceKind::Impulse) {
    for (double ti : realization.impulse_times) {
      const auto k = std::clamp<Eigen::Index>(
          static_cast<Eigen::Index>(std::llround(ti / dt)), 0, steps);
      jumps.emplace(k, ti);
    }
  }
  const bool bounded = realization.kind == DisturbanceKind::Bounded;

  const VectorField joint = [&](double t, const Vector& z) {
    const Vector x1 = z.head(n1);
    const Vector x2 = z.tail(n2);
    const Vector u2v = u2(t);
    const Vector u1v = interface_control(cert, u2v, x1, x2);
    Vector dz(n1 + n2);
    dz.head(n1) = sys1.A * x1 + sys1.B * u1v;
    if (bounded) dz.head(n1) += realization.Bd * realization.signal.eval(t);
    dz.tail(n2) = sys2.A * x2 + sys2.B * u2v;
    return dz;
  };

  Trace trace;
  trace.dt = dt;
  trace.eps = certified_eps;
  trace.t.reserve(steps + 1);

  Vector z(n1 + n2);
  z << x1_0, x2_0;
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double tk = k * dt;
    if (k > 0) z = step_rk4(joint, z, (k - 1) * dt, dt);

    bool jumped = false;
    for (auto [it, end] = jumps.equal_range(k); it != end; ++it) {
      ImpulseEvent ev;
      ev.step = k;
      ev.time = tk;
      ev.requested_time = it->second;
      ev.v_before = simulation_value(cert, z.head(n1), z.tail(n2));
      z.head(n1) = apply_impulse(z.head(n1), realization.Bd);
      ev.v_after = simulation_value(cert, z.head(n1), z.tail(n2));
      trace.events.push_back(ev);
      jumped = true;
    }
    if (!z.allFinite()) throw NonFinite("simulate: state left the finite range");

    const Vector x1 = z.head(n1);
    const Vector x2 = z.tail(n2);
    const Vector u2v = u2(tk);
    trace.t.push_back(tk);
    trace.x1.push_back(x1);
    trace.x2.push_back(x2);
    trace.u1.push_back(interface_control(cert, u2v, x1, x2));
    trace.u2.push_back(u2v);
    trace.y1.push_back(sys1.C * x1);
    trace.y2.push_back(sys2.C * x2);
    trace.V.push_back(simulation_value(cert, x1, x2));
    trace.impulse.push_back(jumped ? 1 : 0);
  }
  return trace;
}

BoundReport check_bound(const Trace& trace, double eps) {
  BoundReport report;
  report.eps = eps;
  report.tol = 1e-6 + 10.0 * trace.dt * trace.dt;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double err = (trace.y1[k] - trace.y2[k]).norm();
    if (err > report.max_error) {
      report.max_error = err;
      report.max_error_time = trace.t[k];
    }
    if (err > eps + report.tol) {
      report.violations.push_back(
          {static_cast<Eigen::Index>(k), trace.t[k], err});
    }
  }
  report.margin = eps - report.max_error;
  return report;
}

namespace {

void append_num(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += ',';
  line += buf;
}

void append_header(std::string& line, const char* base, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    line += ',';
    line += base;
    line += std::to_string(i);
  }
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& out) {
  if (trace.size() == 0) return;
  const Eigen::Index n1 = trace.x1[0].size(), n2 = trace.x2[0].size();
  const Eigen::Index p1 = trace.u1[0].size(), p2 = trace.u2[0].size();
  const Eigen::Index m = trace.y1[0].size();

  std::string header = "t";
  append_header(header, "x1_", n1);
  append_header(header, "x2_", n2);
  append_header(header, "u1_", p1);
  append_header(header, "u2_", p2);
  append_header(header, "y1_", m);
  append_header(header, "y2_", m);
  header += ",V,eps,impulse";
  out << header << '\n';

  for (std::size_t k = 0; k < trace.size(); ++k) {
    std::string line;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", trace.t[k]);
    line += buf;
    for (Eigen::Index i = 0; i < n1; ++i) append_num(line, trace.x1[k](i));
    for (Eigen::Index i = 0; i < n2; ++i) append_num(line, trace.x2[k](i));
    for (Eigen::Index i = 0; i < p1; ++i) append_num(line, trace.u1[k](i));
    for (Eigen::Index i = 0; i < p2; ++i) append_num(line, trace.u2[k](i));
    for (Eigen::Index i = 0; i < m; ++i) append_num(line, trace.y1[k](i));
    for (Eigen::Index i = 0; i < m; ++i) append_num(line, trace.y2[k](i));
    append_num(line, trace.V[k]);
    append_num(line, trace.eps);
    line += ',';
    line += trace.impulse[k] ? '1' : '0';
    out << line << '\n';
  }
}

}  // namespace hiersim
