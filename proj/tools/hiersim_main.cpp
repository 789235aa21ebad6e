#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "hiersim/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hiersim: robust approximate-simulation certificates, bounds, "
               "and interfaced simulation for hierarchical linear control"};
  app.require_subcommand(1);

  hiersim::cli::Options opts;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub, bool needs_scenario) {
    if (needs_scenario) {
      sub->add_option("--scenario", opts.scenario_path, "scenario JSON file")
          ->required();
    }
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", seed, "override the scenario seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  auto* synth = app.add_subcommand("synthesize",
                                   "synthesize and verify a certificate");
  add_common(synth, true);
  synth->add_option("--cert", opts.cert_path, "certificate output file");
  synth->add_option("--samples", opts.samples, "verification sample count");

  auto* plan = app.add_subcommand("plan", "plan a path with certified clearance");
  add_common(plan, true);
  plan->add_option("--cert", opts.cert_path, "certificate file");

  auto* sim = app.add_subcommand("simulate",
                                 "simulate the interfaced pair and check the bound");
  add_common(sim, true);
  sim->add_option("--cert", opts.cert_path, "certificate file");
  sim->add_option("--path", opts.path_path, "plan artifact (path.json)");

  auto* verify = app.add_subcommand("verify", "re-check a certificate file");
  add_common(verify, true);
  verify->add_option("--cert", opts.cert_path, "certificate file");
  verify->add_option("--samples", opts.samples, "verification sample count");

  auto* repro = app.add_subcommand("reproduce",
                                   "run the five corridor experiments");
  add_common(repro, false);

  CLI11_PARSE(app, argc, argv);
  if (seed_set) opts.seed = seed;

  if (synth->parsed()) return hiersim::cli::cmd_synthesize(opts);
  if (plan->parsed()) return hiersim::cli::cmd_plan(opts);
  if (sim->parsed()) return hiersim::cli::cmd_simulate(opts);
  if (verify->parsed()) return hiersim::cli::cmd_verify(opts);
  if (repro->parsed()) return hiersim::cli::cmd_reproduce(opts);
  return hiersim::cli::kExitFailure;
}
