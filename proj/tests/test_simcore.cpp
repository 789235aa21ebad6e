#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hiersim/commands.hpp"
#include "hiersim/errors.hpp"
#include "hiersim/matkit.hpp"
#include "hiersim/rng.hpp"
#include "hiersim/simcore.hpp"
#include "support/random_systems.hpp"

using namespace hiersim;

namespace {

LinearSystem scalar_integrator() {
  LinearSystem sys;
  sys.A = Matrix::Zero(1, 1);
  sys.B = Matrix::Identity(1, 1);
  sys.C = Matrix::Identity(1, 1);
  return sys;
}

// Hand-built certificate for the scalar interfaced pair with closed-form
// error dynamics de/dt = K e.
RobustCertificate scalar_cert(double K, double lambda) {
  RobustCertificate cert;
  cert.K = Matrix::Constant(1, 1, K);
  cert.lambda = lambda;
  cert.M = Matrix::Identity(1, 1);
  cert.sqrtM = Matrix::Identity(1, 1);
  cert.lambda_max_M = 1.0;
  cert.P = Matrix::Identity(1, 1);
  cert.Q = Matrix::Zero(1, 1);
  cert.R = Matrix::Identity(1, 1);
  cert.c_dist = 0.0;
  cert.c_input = 0.0;
  return cert;
}

VectorSignal zero_signal(Eigen::Index p) {
  return [p](double) { return Vector::Zero(p); };
}

struct CorridorPlan {
  Scenario sc;
  RobustCertificate cert;
  double eps = 0.0;
  ControlProfile profile;
};

CorridorPlan plan_corridor(cli::CorridorVariant variant) {
  CorridorPlan plan;
  plan.sc = cli::corridor_scenario(variant);
  plan.cert = synthesize_certificate(plan.sc.concrete, plan.sc.abstraction,
                                     plan.sc.synthesis);
  const DisturbanceSpec spec =
      plan.sc.disturbance.spec(plan.sc.effective_plan_regime());
  plan.eps = error_bound(plan.cert, 0.0, plan.sc.u_max, spec);
  Workspace ws = *plan.sc.workspace;
  ws.clearance = plan.eps;
  const Roadmap map = build_prm(ws, plan.sc.planner.n_samples,
                                plan.sc.planner.k_neighbors, plan.sc.seed);
  const auto waypoints = shortest_path(map, ws.start, ws.goal);
  plan.profile = path_to_control(waypoints, plan.sc.u_max, plan.sc.ramp_time);
  return plan;
}

VectorSignal profile_signal(const ControlProfile& profile) {
  return [profile](double t) {
    const Point2 v = profile.velocity(t);
    return (Vector(2) << v.x(), v.y()).finished();
  };
}

Vector start_state(const Scenario& sc) {
  return (Vector(2) << sc.workspace->start.x(), sc.workspace->start.y())
      .finished();
}

}  // namespace

TEST_CASE("step_rk4 basics") {
  const VectorField still = [](double, const Vector& x) {
    return Vector::Zero(x.size());
  };
  const Vector x0 = (Vector(2) << 1.0, -2.0).finished();
  CHECK((step_rk4(still, x0, 0.0, 0.1) - x0).norm() == 0.0);

  const VectorField decay = [](double, const Vector& x) {
    return Vector(-x);
  };
  const Vector x1 = step_rk4(decay, Vector::Ones(1), 0.0, 0.1);
  CHECK(std::abs(x1(0) - std::exp(-0.1)) < 1e-7);

  // one RK4 step on a linear field equals the 4th-order exponential series
  Matrix A(2, 2);
  A << 0.0, 1.0, -2.0, -0.4;
  const VectorField lin = [&A](double, const Vector& x) { return Vector(A * x); };
  const double h = 0.05;
  const Vector z0 = (Vector(2) << 0.7, -1.1).finished();
  Matrix series = Matrix::Identity(2, 2);
  Matrix term = Matrix::Identity(2, 2);
  for (int k = 1; k <= 4; ++k) {
    term = (term * (h * A) / double(k)).eval();
    series += term;
  }
  CHECK((step_rk4(lin, z0, 0.0, h) - series * z0).norm() < 1e-13);

  const VectorField blow = [](double, const Vector& x) {
    return Vector(1e308 * x);
  };
  CHECK_THROWS_AS(step_rk4(blow, Vector::Ones(1), 0.0, 1.0), NonFinite);
}

TEST_CASE("apply_impulse shifts the state by the column") {
  const Vector x = (Vector(3) << 1, 2, 3).finished();
  Matrix Bd = Matrix::Zero(3, 1);
  Bd(0, 0) = 1.0;
  CHECK((apply_impulse(Vector::Zero(3), Bd) - Bd.col(0)).norm() == 0.0);
  CHECK((apply_impulse(x, Matrix::Zero(3, 1)) - x).norm() == 0.0);

  // scalar jump bounded by the weighted triangle inequality
  RobustCertificate cert = scalar_cert(-2.0, 1.8);
  const Vector before = Vector::Zero(1);
  const Vector after = apply_impulse(before, Matrix::Constant(1, 1, 0.3));
  const double v_before = simulation_value(cert, before, Vector::Zero(1));
  const double v_after = simulation_value(cert, after, Vector::Zero(1));
  CHECK(v_after <= v_before + 0.3 * std::sqrt(cert.lambda_max_M) + 1e-12);
}

TEST_CASE("simulate keeps the invariant manifold at zero error") {
  const Scenario sc = cli::corridor_scenario(cli::CorridorVariant::Nominal);
  const RobustCertificate cert =
      synthesize_certificate(sc.concrete, sc.abstraction, sc.synthesis);
  const Vector x2_0 = (Vector(2) << 3.0, 4.0).finished();
  const Vector x1_0 = cert.P * x2_0;
  DisturbanceRealization none;
  const Trace trace = simulate(sc.concrete, sc.abstraction, cert,
                               zero_signal(2), x1_0, x2_0, none, 0.01, 2.0, 0.0);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    CHECK(trace.V[k] <= 1e-9);
    CHECK((trace.y1[k] - trace.y2[k]).norm() <= 1e-9);
  }
  const BoundReport rep = check_bound(trace, 0.0);
  CHECK(rep.pass());

  // grid is uniform and strictly increasing
  for (std::size_t k = 1; k < trace.size(); ++k) {
    CHECK(trace.t[k] - trace.t[k - 1] == doctest::Approx(0.01).epsilon(1e-12));
  }
}

TEST_CASE("simulate reproduces the scalar closed-form decay") {
  const LinearSystem sys = scalar_integrator();
  const RobustCertificate cert = scalar_cert(-2.0, 1.8);
  DisturbanceRealization none;
  const Trace trace =
      simulate(sys, sys, cert, zero_signal(1), Vector::Ones(1), Vector::Zero(1),
               none, 0.01, 2.0, 1.0);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto k = static_cast<std::size_t>(std::llround(t / 0.01));
    CHECK(std::abs(trace.V[k] - std::exp(-2.0 * t)) < 1e-6);
  }
}

TEST_CASE("simulate validates the grid") {
  const LinearSystem sys = scalar_integrator();
  const RobustCertificate cert = scalar_cert(-2.0, 1.8);
  DisturbanceRealization none;
  CHECK_THROWS_AS(simulate(sys, sys, cert, zero_signal(1), Vector::Ones(1),
                           Vector::Zero(1), none, 0.2, 2.0, 1.0),
                  GridTooCoarse);  // dt > 1e-2 * T
  CHECK_THROWS_AS(simulate(sys, sys, cert, zero_signal(1), Vector::Ones(1),
                           Vector::Zero(1), none, 0.15, 100.0, 1.0),
                  GridTooCoarse);  // dt > 0.2 / lambda
}

TEST_CASE("check_bound flags exactly the exceeding samples") {
  Trace trace;
  trace.dt = 0.01;
  for (int k = 0; k <= 3; ++k) {
    trace.t.push_back(0.01 * k);
    trace.x1.push_back(Vector::Zero(1));
    trace.x2.push_back(Vector::Zero(1));
    trace.u1.push_back(Vector::Zero(1));
    trace.u2.push_back(Vector::Zero(1));
    trace.y1.push_back(Vector::Constant(1, k == 2 ? 1.0 : 0.0));
    trace.y2.push_back(Vector::Zero(1));
    trace.V.push_back(0.0);
    trace.impulse.push_back(0);
  }
  const BoundReport rep = check_bound(trace, 0.5);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].step == 2);
  CHECK(rep.violations[0].time == doctest::Approx(0.02));
  CHECK(rep.max_error == doctest::Approx(1.0));
  CHECK(rep.margin == doctest::Approx(-0.5));
}

TEST_CASE("trace CSV carries the documented header and recomputable outputs") {
  const LinearSystem sys = scalar_integrator();
  const RobustCertificate cert = scalar_cert(-2.0, 1.8);
  DisturbanceRealization none;
  const Trace trace =
      simulate(sys, sys, cert, zero_signal(1), Vector::Ones(1), Vector::Zero(1),
               none, 0.01, 1.0, 0.75);
  std::ostringstream out;
  write_trace_csv(trace, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x1_0,x2_0,u1_0,u2_0,y1_0,y2_0,V,eps,impulse");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    CHECK((trace.y1[k] - sys.C * trace.x1[k]).norm() == 0.0);
    CHECK((trace.y2[k] - sys.C * trace.x2[k]).norm() == 0.0);
  }
}

TEST_CASE("bounded disturbances stay within the certified bound (Monte Carlo)") {
  Rng rng(2024);
  int runs = 0;
  while (runs < 25) {
    const mc::Instance inst = mc::make_instance(rng);
    const double T = 8.0;
    const double dt = mc::pick_dt(inst);
    const double u2_max = rng.uniform(0.1, 1.0);
    const double d_max = rng.uniform(0.1, 1.0);

    const Vector x2_0 = 0.5 * rng.normal_vector(inst.sys2.n());
    const Vector x1_0 =
        inst.cert.P * x2_0 + 0.5 * rng.normal_vector(inst.sys1.n());
    const double V0 = simulation_value(inst.cert, x1_0, x2_0);

    GammaCoefficients g =
        gamma_coefficients(inst.cert, inst.sys1, inst.sys2, inst.Bd);
    RobustCertificate cert = inst.cert;
    cert.c_dist = g.c_dist;

    const DisturbanceSpec spec{DisturbanceKind::Bounded, d_max, 0.0, 0.0};
    const double eps = error_bound(cert, V0, u2_max, spec);

    const auto u2 = mc::random_u2(rng, inst.sys2.p(), u2_max, T);
    DisturbanceRealization real =
        mc::random_bounded(rng, inst.Bd, d_max, dt, T);
    validate_realization(real, spec, inst.sys1.n());

    const Trace trace = simulate(
        inst.sys1, inst.sys2, cert, [&u2](double t) { return u2.eval(t); },
        x1_0, x2_0, real, dt, T, eps);
    const BoundReport rep = check_bound(trace, eps);
    CHECK_MESSAGE(rep.pass(), "run ", runs, " max_error ", rep.max_error,
                  " vs eps ", eps);
    ++runs;
  }
}

TEST_CASE("impulse trains respect the dwell-dependent bound (Monte Carlo)") {
  Rng rng(4048);
  int runs = 0;
  while (runs < 18) {
    const mc::Instance inst = mc::make_instance(rng);
    const double T = 8.0;
    const double dt = mc::pick_dt(inst);
    const double u2_max = rng.uniform(0.1, 0.8);
    const double b_max = rng.uniform(0.1, 0.5);
    const double lambda = inst.cert.lambda;

    for (double dwell_factor : {0.3, 1.0, 3.0}) {
      const double t_dwell = dwell_factor / lambda;
      const Vector x2_0 = 0.3 * rng.normal_vector(inst.sys2.n());
      const Vector x1_0 =
          inst.cert.P * x2_0 + 0.3 * rng.normal_vector(inst.sys1.n());
      const double V0 = simulation_value(inst.cert, x1_0, x2_0);

      const DisturbanceSpec spec{DisturbanceKind::Impulse, 0.0, b_max, t_dwell};
      const double eps = error_bound(inst.cert, V0, u2_max, spec);

      const auto u2 = mc::random_u2(rng, inst.sys2.p(), u2_max, T);
      DisturbanceRealization real =
          mc::random_impulses(rng, inst.sys1.n(), b_max, t_dwell, dt, T);
      validate_realization(real, spec, inst.sys1.n());

      const Trace trace = simulate(
          inst.sys1, inst.sys2, inst.cert, [&u2](double t) { return u2.eval(t); },
          x1_0, x2_0, real, dt, T, eps);
      CHECK(check_bound(trace, eps).pass());
      CHECK(!trace.events.empty());

      // the jump itself obeys the weighted triangle inequality
      const double jump_cap = b_max * std::sqrt(inst.cert.lambda_max_M) + 1e-9;
      for (const auto& ev : trace.events) {
        CHECK(ev.v_after <= ev.v_before + jump_cap);
      }

      // dwell >= 1/lambda reduces to the single-impulse bound
      if (t_dwell >= 1.0 / lambda) {
        const double eps_single =
            std::max(V0, inst.cert.c_input * u2_max) +
            b_max * std::sqrt(inst.cert.lambda_max_M);
        CHECK(check_bound(trace, eps_single).pass());
      }
    }
    ++runs;
  }
}

TEST_CASE("between impulses V decays at least at rate lambda toward gamma") {
  // scalar case with exact decay dV/dt = -2 V and gamma = 0
  {
    const LinearSystem sys = scalar_integrator();
    const RobustCertificate cert = scalar_cert(-2.0, 2.0);
    DisturbanceRealization none;
    const double dt = 0.01;
    const Trace trace =
        simulate(sys, sys, cert, zero_signal(1), Vector::Ones(1),
                 Vector::Zero(1), none, dt, 2.0, 1.0);
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
      const double quotient = (trace.V[k + 1] - trace.V[k]) / dt;
      const double rhs = cert.lambda * (-trace.V[k]);
      const double slack =
          dt * (cert.lambda * (std::abs(quotient) + cert.c_input) + 1.0);
      CHECK(quotient <= rhs + slack);
    }
  }

  // corridor impulse run: the same inequality holds off the jump rows
  {
    const CorridorPlan plan = plan_corridor(cli::CorridorVariant::ImpulseCorrected);
    const Scenario& sc = plan.sc;
    const double dt = sc.dt;
    const double T = plan.profile.total_time + 5.0;
    DisturbanceRealization real;
    real.kind = DisturbanceKind::Impulse;
    real.Bd = sc.disturbance.Bd;
    for (double t = 2.5; t <= T; t += 2.5) real.impulse_times.push_back(t);
    const Trace trace =
        simulate(sc.concrete, sc.abstraction, plan.cert,
                 profile_signal(plan.profile), plan.cert.P * start_state(sc),
                 start_state(sc), real, dt, T, plan.eps);
    const double u2_slope = sc.u_max / sc.ramp_time;
    int checked = 0;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
      if (trace.impulse[k] || trace.impulse[k + 1]) continue;
      const double quotient = (trace.V[k + 1] - trace.V[k]) / dt;
      const double gamma = plan.cert.c_input * trace.u2[k].norm();
      const double rhs = plan.cert.lambda * (-trace.V[k] + gamma);
      const double slack =
          dt * (plan.cert.lambda *
                    (std::abs(quotient) + plan.cert.c_input * u2_slope) +
                1.0);
      CHECK(quotient <= rhs + slack);
      ++checked;
    }
    CHECK(checked > 1000);
  }
}

TEST_CASE("halving dt barely moves the corridor error curve") {
  const CorridorPlan plan = plan_corridor(cli::CorridorVariant::Nominal);
  const Scenario& sc = plan.sc;
  const double T = plan.profile.total_time + 5.0;
  DisturbanceRealization none;
  const Vector x2_0 = start_state(sc);
  const Vector x1_0 = plan.cert.P * x2_0;

  double max_err[2] = {0.0, 0.0};
  const double dts[2] = {0.02, 0.01};
  for (int i = 0; i < 2; ++i) {
    const Trace trace =
        simulate(sc.concrete, sc.abstraction, plan.cert,
                 profile_signal(plan.profile), x1_0, x2_0, none, dts[i], T,
                 plan.eps);
    max_err[i] = check_bound(trace, plan.eps).max_error;
  }
  CHECK(std::abs(max_err[0] - max_err[1]) <= 1e-5);
}

TEST_CASE("realization validation catches inadmissible inputs") {
  DisturbanceSpec spec{DisturbanceKind::Bounded, 0.5, 0.0, 0.0};
  DisturbanceRealization real;
  real.kind = DisturbanceKind::Bounded;
  real.Bd = Matrix::Identity(2, 2);
  real.signal.dim = 2;
  real.signal.hold = 1.0;
  real.signal.values = {Vector::Constant(2, 1.0)};  // norm sqrt(2) > 0.5
  CHECK_THROWS_AS(validate_realization(real, spec, 2), InvalidSpec);

  DisturbanceSpec imp{DisturbanceKind::Impulse, 0.0, 0.1, 1.0};
  DisturbanceRealization impreal;
  impreal.kind = DisturbanceKind::Impulse;
  impreal.Bd = Matrix::Constant(2, 1, 1.0);  // norm sqrt(2) > 0.1
  impreal.impulse_times = {1.0, 2.0};
  CHECK_THROWS_AS(validate_realization(impreal, imp, 2), InvalidSpec);

  impreal.Bd = Matrix::Constant(2, 1, 0.05);
  impreal.impulse_times = {1.0, 1.5};  // gap below the dwell
  CHECK_THROWS_AS(validate_realization(impreal, imp, 2), InvalidSpec);
}
