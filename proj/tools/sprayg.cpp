#include <iostream>

#include "CLI11.hpp"
#include "sprayg/cli.hpp"

int main(int argc, char** argv) {
  sprayg::CliOptions o;
  CLI::App app{"Integrate Lie algebroids through sprays"};
  app.set_version_flag("--version", sprayg::kToolVersion);
  app.add_option("--config", o.config, "model JSON file, or catalog:NAME");
  app.add_option("--command", o.command, "check | flow | theta | multiply | divide | exp | verify | bch | "
                                          "integrate-form | vanest | catalog")
      ->required();
  std::uint64_t seed = 0;
  double scale = 0.0;
  int samples = 0, rk_steps = 0, quad_nodes = 0;
  auto* seed_opt = app.add_option("--seed", seed);
  auto* scale_opt = app.add_option("--scale", scale);
  auto* samples_opt = app.add_option("--samples", samples);
  auto* rk_opt = app.add_option("--rk-steps", rk_steps);
  auto* quad_opt = app.add_option("--quad-nodes", quad_nodes);
  app.add_option("--out", o.out, "write the JSON report here instead of stdout");
  app.add_option("--csv", o.csv, "per-sample residuals as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : sprayg::exit_input_error;
  }
  if (*seed_opt) o.seed = seed;
  if (*scale_opt) o.scale = scale;
  if (*samples_opt) o.samples = samples;
  if (*rk_opt) o.rk_steps = rk_steps;
  if (*quad_opt) o.quad_nodes = quad_nodes;
  return sprayg::run_command(o, std::cout);
}
