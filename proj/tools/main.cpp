#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "miocp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MIOCP solver: KL-regularized LQG control with prior "
               "optimization by alternating minimization"};
  app.require_subcommand(1);

  miocp::cli::RunManifest manifest;
  const auto add_common = [&manifest](CLI::App* sub) {
    sub->add_option("--spec", manifest.spec_path, "problem config (JSON)")
        ->required();
    sub->add_option("--out", manifest.output_dir, "output directory")
        ->required();
    sub->add_option("--seed", manifest.seed, "rollout seed");
    sub->add_option("--paths", manifest.num_paths, "number of rollout paths");
    sub->add_option("--max-iters", manifest.solve.max_iters,
                    "solver iteration cap");
    sub->add_option("--tol-w2", manifest.solve.tol_prior_w2,
                    "stop when the summed squared W2 prior step drops below "
                    "this");
  };

  auto* solve = app.add_subcommand("solve", "run the alternating solver");
  add_common(solve);
  auto* simulate =
      app.add_subcommand("simulate", "closed-loop rollouts of a solved policy");
  add_common(simulate);
  auto* evaluate =
      app.add_subcommand("evaluate", "objective breakdown for stored "
                                     "policy.json/prior.json");
  add_common(evaluate);
  auto* sweep = app.add_subcommand("sweep", "solve once per epsilon value");
  add_common(sweep);
  sweep->add_option("--epsilon", manifest.epsilons, "epsilon values")
      ->delimiter(',')
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      miocp::cli::cmd_solve(manifest);
    } else if (simulate->parsed()) {
      miocp::cli::cmd_simulate(manifest);
    } else if (evaluate->parsed()) {
      miocp::cli::cmd_evaluate(manifest);
    } else if (sweep->parsed()) {
      miocp::cli::cmd_sweep(manifest);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
