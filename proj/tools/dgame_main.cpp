#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  using dgame::cli::Options;
  Options opts;
  std::string problem;
  std::optional<std::uint64_t> preimage_seed;

  CLI::App app{"Forward and inverse LQ descriptor differential games"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--seed", opts.seed, "Seed for multistarts and sampling")
      ->capture_default_str();
  app.add_option("--tol", opts.tol, "Relative convergence tolerance")->capture_default_str();
  app.add_option("--starts", opts.starts, "Forward-solver multistarts")->capture_default_str();
  app.add_option("--eps-pd", opts.eps_pd, "Definiteness margin factor")
      ->capture_default_str();
  app.add_option("--out", opts.out, "Write the JSON report to this file");
  app.add_option("--cost-set", opts.cost_set, "Use a named entry of cost_sets");

  auto add_problem = [&](CLI::App* sub) {
    sub->add_option("problem", problem, "Problem JSON file")->required()->check(CLI::ExistingFile);
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--x1", opts.x1, "Reduced initial state (default: ones)");
    sub->add_option("--horizon", opts.horizon, "Simulation horizon [s]")->capture_default_str();
    sub->add_option("--dt", opts.dt, "Sampling step [s]")->capture_default_str();
    sub->add_option("--csv", opts.csv, "Trajectory CSV output");
  };

  CLI::App* reduce = app.add_subcommand("reduce", "Pencil analysis and reduced game");
  add_problem(reduce);

  CLI::App* forward = app.add_subcommand("forward", "Feedback Nash equilibria for given costs");
  add_problem(forward);

  CLI::App* inverse = app.add_subcommand("inverse", "Cost parameters rationalizing F");
  add_problem(inverse);
  inverse->add_flag("--diagonal-q", opts.diagonal_q, "Restrict Q_i to be diagonal");
  inverse->add_option("--trajectory", opts.trajectory,
                      "Fit F by least squares from a trajectory CSV");

  CLI::App* misspecify =
      app.add_subcommand("misspecify", "Identify under E = I and test on the descriptor model");
  add_problem(misspecify);
  misspecify->add_option("--theta", opts.theta_file, "Use these parameters instead");
  add_sim(misspecify);

  CLI::App* verify = app.add_subcommand("verify", "Check membership of candidate parameters");
  add_problem(verify);
  verify->add_option("--theta", opts.theta_file, "JSON file with one theta per player");
  verify->add_option("--nash-trials", opts.nash_trials, "Random unilateral deviations")
      ->capture_default_str();

  CLI::App* simulate = app.add_subcommand("simulate", "Closed-loop trajectory as CSV");
  add_problem(simulate);
  add_sim(simulate);
  simulate->add_option("--preimage-seed", preimage_seed,
                       "Simulate a random equivalent feedback instead of F");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dgame::cli::kExitUsage;
  }
  opts.preimage_seed = preimage_seed;
  CLI::App* sub = app.get_subcommands().front();
  return dgame::cli::run_command(sub->get_name(), problem, opts, std::cout, std::cerr);
}
