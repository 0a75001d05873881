#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "miocp/evaluation.hpp"
#include "miocp/problem.hpp"
#include "miocp/solver.hpp"

namespace miocp::cli {

struct RunManifest {
  std::string spec_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  int num_paths = 1000;
  SolveConfig solve;
  std::vector<double> epsilons;  // sweep only
};

// solve: trace.csv (iter,J_total,J_quadratic,J_kl,J_terminal,prior_step_w2,
// w2_to_final), policy.json, prior.json, summary.json.
void cmd_solve(const RunManifest& manifest);

// simulate: paths.csv, terminal_scatter.csv, terminal_regression.json
// (coordinates 0/1, emitted when the state has >= 2 dimensions). Runs solve
// first when policy.json is absent.
void cmd_simulate(const RunManifest& manifest);

// evaluate: objective.json for the policy.json/prior.json pair in the
// output directory.
void cmd_evaluate(const RunManifest& manifest);

// sweep: one solve subdirectory eps_<value> per requested epsilon.
void cmd_sweep(const RunManifest& manifest);

// Lower-level entry used by solve and sweep.
SolveTrace run_solve(const ProblemSpec& spec, const SolveConfig& cfg,
                     const std::filesystem::path& out_dir);

nlohmann::json policy_to_json(const AffinePolicy& policy);
AffinePolicy policy_from_json(const nlohmann::json& j);
nlohmann::json prior_to_json(const PriorSequence& prior);
PriorSequence prior_from_json(const nlohmann::json& j);
nlohmann::json objective_to_json(const ObjectiveBreakdown& objective);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& j);

// %.17g, enough digits for exact double round-trips in the CSV outputs.
std::string format_double(double v);

}  // namespace miocp::cli
