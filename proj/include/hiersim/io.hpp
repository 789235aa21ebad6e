#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hiersim/planner.hpp"
#include "hiersim/simcore.hpp"
#include "hiersim/synthesis.hpp"
#include "hiersim/types.hpp"

namespace hiersim {

/// Disturbance configuration as written in scenario files: the bound-side
/// spec plus enough detail to realize a concrete signal.
struct DisturbanceConfig {
  DisturbanceKind kind = DisturbanceKind::None;
  Matrix Bd;  // empty when kind == None and no channel is declared
  // bounded
  double d_max = 0.0;
  std::string signal_preset = "constant";  // constant|worst_constant|piecewise_random
  Vector signal_value;                     // constant preset
  double signal_hold = 0.5;
  // impulse
  double b_max = 0.0;
  double t_dwell = 0.0;
  double impulse_period = 0.0;  // defaults to t_dwell
  double impulse_start = 0.0;   // defaults to the period
  std::vector<double> impulse_times;  // explicit schedule overrides the period

  DisturbanceSpec spec(DisturbanceKind regime) const;
};

struct PlannerConfig {
  int n_samples = 500;
  int k_neighbors = 10;
};

/// Declarative description of one experiment, schema "hiersim-scenario-1".
struct Scenario {
  LinearSystem concrete;
  LinearSystem abstraction;
  SynthesisOptions synthesis;
  DisturbanceConfig disturbance;
  // Regime whose error bound drives planning and bound checking. A value
  // different from disturbance.kind expresses the mismatched runs (plan
  // with the undisturbed bound, simulate with the disturbance on).
  DisturbanceKind plan_regime = DisturbanceKind::None;
  bool plan_regime_set = false;
  std::optional<Workspace> workspace;
  PlannerConfig planner;
  double u_max = 1.0;
  double ramp_time = 0.1;
  std::optional<Vector> x1_0;
  std::optional<Vector> x2_0;
  std::string u2_preset = "zero";  // zero|constant, used when no path drives u2
  Vector u2_value;
  double dt = 0.01;
  double T = 10.0;
  std::uint64_t seed = 1;

  DisturbanceKind effective_plan_regime() const {
    return plan_regime_set ? plan_regime : disturbance.kind;
  }
};

/// Planner output: waypoints plus the velocity-profile description needed
/// to rebuild the abstract input signal, schema "hiersim-path-1".
struct PathFile {
  DisturbanceKind regime = DisturbanceKind::None;
  double eps = 0.0;
  double u_max = 0.0;
  double ramp_time = 0.0;
  double total_time = 0.0;
  std::vector<Point2> waypoints;
};

/// Simulation outcome, schema "hiersim-report-1".
struct Report {
  double eps = 0.0;
  double tol = 0.0;
  double max_error = 0.0;
  double margin = 0.0;
  std::vector<BoundViolation> violations;
  double runtime_s = 0.0;
  // extras
  std::string regime = "none";
  std::vector<ImpulseEvent> impulse_events;
  double max_snap_error = 0.0;
  std::optional<double> goal_distance;
  std::optional<double> goal_radius;
  std::optional<bool> goal_reached;
};

std::string kind_name(DisturbanceKind kind);
DisturbanceKind kind_from_name(const std::string& name);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

// Certificate files, schema "hiersim-cert-1", matrices as nested row arrays.
void save_certificate(const RobustCertificate& cert, const std::string& path);
RobustCertificate load_certificate(const std::string& path);

void save_path_file(const PathFile& pf, const std::string& path);
PathFile load_path_file(const std::string& path);
void save_waypoints_csv(const std::vector<Point2>& waypoints,
                        const std::string& path);

void save_report(const Report& report, const std::string& path);
Report load_report(const std::string& path);

}  // namespace hiersim
