#pragma once

#include <vector>

#include "miocp/evaluation.hpp"
#include "miocp/problem.hpp"

namespace miocp {

struct SolveConfig {
  int max_iters = 100000;
  // Stop when Σ_k W₂²(ρ_k^{(i+1)}, ρ_k^{(i)}) drops below this.
  double tol_prior_w2 = 1e-10;
  // Optional stop on the objective decrease; 0 disables.
  double tol_objective = 0.0;
  int trace_every = 1;
  // Keep every prior iterate (needed for distance-to-final diagnostics).
  bool record_priors = false;
};

struct SolveTrace {
  // J(π^{(i)}, ρ^{(i)}) for the traced iterations, plus the squared
  // Wasserstein-2 step the prior update made at the same iteration.
  std::vector<ObjectiveBreakdown> objective;
  std::vector<double> prior_step_w2;
  std::vector<int> trace_iterations;
  int iterations_run = 0;
  bool converged = false;
  // The pair the last recorded objective was evaluated at.
  AffinePolicy final_policy;
  PriorSequence final_prior;
  // ρ^{(0)} .. ρ^{(iterations_run)} when record_priors is set.
  std::vector<PriorSequence> prior_history;
};

double prior_w2_sq_sum(const PriorSequence& a, const PriorSequence& b);

// Alternating minimization: π^{(i)} optimal for ρ^{(i)}, then ρ^{(i+1)}
// optimal for π^{(i)}. Deterministic; the recorded objective sequence is
// nonincreasing up to roundoff.
SolveTrace solve(const ValidatedSpec& vs, const PriorSequence& initial_prior,
                 const SolveConfig& cfg);

}  // namespace miocp
