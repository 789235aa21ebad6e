#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hiersim/io.hpp"

namespace hiersim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitSynthesisInfeasible = 2;
inline constexpr int kExitNoPath = 3;
inline constexpr int kExitBoundViolated = 4;

struct Options {
  std::string scenario_path;
  std::string cert_path;   // synthesize: output; plan/simulate/verify: input
  std::string path_path;   // simulate: plan artifact
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  int samples = 1000;                 // verification sample count
  bool deterministic_reports = false; // zero out wall-clock fields
};

// Synthesizes and verifies the certificate for a scenario, writes the
// certificate file, prints the error bound per disturbance regime.
int cmd_synthesize(const Options& opts);

// Plans a clear path whose clearance is the certified bound of the
// scenario's planning regime; writes path.json and path.csv.
int cmd_plan(const Options& opts);

// Runs the interfaced simulation, checks the certified bound, writes
// trace.csv, report.json and plot.svg. Returns 4 when the bound was
// violated.
int cmd_simulate(const Options& opts);

// Re-checks a certificate file against its scenario.
int cmd_verify(const Options& opts);

// Runs the five corridor experiments (nominal, bounded naive/corrected,
// impulse naive/corrected) with fixed seeds into out_dir and writes a
// summary table.
int cmd_reproduce(const Options& opts);

// The corridor scenario presets used by cmd_reproduce, exposed for tests.
enum class CorridorVariant {
  Nominal,
  BoundedNaive,
  BoundedCorrected,
  ImpulseNaive,
  ImpulseCorrected,
};
Scenario corridor_scenario(CorridorVariant variant);

}  // namespace hiersim::cli
