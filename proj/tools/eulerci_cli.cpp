// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

// eulerci <plan|verify|step|run|export|fit> [--config file] [overrides]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "eulerci/harness.hpp"

int main(int argc, char **argv)
{
  using namespace eulerci;
  CLI::App app{"Convex integration harness for the Euler-Reynolds iteration"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> lambda;
  std::optional<int> steps;
  std::optional<int> dim;
  std::string state_dir;
  std::string input;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--lambda", lambda, "Fixed oscillation parameter (0 searches)");
    sub->add_option("--steps", steps, "Number of iteration steps");
    sub->add_option("--dim", dim, "Dimension (2 or 3)");
  };
  auto *plan = app.add_subcommand("plan", "Choose nu, partition families and build gamma");
  auto *verify = app.add_subcommand("verify", "Run the property suites");
  auto *step = app.add_subcommand("step", "One iteration step");
  auto *run = app.add_subcommand("run", "Iterate for n_steps");
  auto *exp = app.add_subcommand("export", "Export a saved state with per-frame norms");
  auto *fit = app.add_subcommand("fit", "Log-log fit of a (lambda, norm) series");
  for (auto *sub : {plan, verify, step, run, exp, fit})
  {
    add_common(sub);
  }
  exp->add_option("--state", state_dir, "State directory (defaults to the resume entry)");
  fit->add_option("--input", input, "CSV with lambda and norm columns")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try
  {
    if (!config_path.empty())
    {
      cfg = RunConfig::load(config_path);
    }
  }
  catch (const Error &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (out)
  {
    cfg.out = *out;
  }
  if (seed)
  {
    cfg.seed = *seed;
  }
  if (lambda)
  {
    cfg.lambda = *lambda;
  }
  if (steps)
  {
    cfg.n_steps = *steps;
  }
  if (dim)
  {
    cfg.dim = *dim;
    cfg.verify_dims = {*dim};
  }

  if (*plan)
  {
    return cmd_plan(cfg, std::cout);
  }
  if (*verify)
  {
    return cmd_verify(cfg, std::cout);
  }
  if (*step)
  {
    return cmd_step(cfg, std::cout);
  }
  if (*run)
  {
    return cmd_run(cfg, std::cout);
  }
  if (*exp)
  {
    return cmd_export(cfg, state_dir, std::cout);
  }
  return cmd_fit(cfg, input, std::cout);
}
