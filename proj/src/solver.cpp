#include "miocp/solver.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "miocp/prior_update.hpp"
#include "miocp/synthesis.hpp"

namespace miocp {

double prior_w2_sq_sum(const PriorSequence& a, const PriorSequence& b) {
  if (a.horizon() != b.horizon()) {
    throw std::invalid_argument("prior_w2_sq_sum: horizon mismatch");
  }
  double sum = 0.0;
  for (int k = 0; k < a.horizon(); ++k) {
    sum += wasserstein2_sq(a.priors[k], b.priors[k]);
  }
  return sum;
}

SolveTrace solve(const ValidatedSpec& vs, const PriorSequence& initial_prior,
                 const SolveConfig& cfg) {
  if (cfg.max_iters < 1) {
    throw std::invalid_argument("solve: max_iters must be >= 1");
  }
  if (cfg.trace_every < 1) {
    throw std::invalid_argument("solve: trace_every must be >= 1");
  }
  require_prior_shape(vs, initial_prior);

  SolveTrace trace;
  PriorSequence rho = initial_prior;
  if (cfg.record_priors) {
    trace.prior_history.push_back(rho);
  }
  double prev_total = std::numeric_limits<double>::infinity();

  for (int i = 0; i < cfg.max_iters; ++i) {
    AffinePolicy pi;
    PriorSequence next;
    ObjectiveBreakdown objective;
    double step_w2 = 0.0;
    try {
      pi = optimal_policy(vs, rho);
      const StateMoments moments = propagate_moments(vs, pi);
      objective = evaluate_objective(vs, pi, rho, moments);
      next = optimal_prior(vs, pi, moments);
      step_w2 = prior_w2_sq_sum(next, rho);
    } catch (const std::exception& e) {
      throw std::runtime_error("solve: iteration " + std::to_string(i) + ": " +
                               e.what());
    }

    const bool stop_w2 = step_w2 < cfg.tol_prior_w2;
    const bool stop_objective = cfg.tol_objective > 0.0 &&
                                i > 0 &&
                                prev_total - objective.total < cfg.tol_objective;
    const bool last = stop_w2 || stop_objective || i == cfg.max_iters - 1;
    if (i % cfg.trace_every == 0 || last) {
      trace.objective.push_back(objective);
      trace.prior_step_w2.push_back(step_w2);
      trace.trace_iterations.push_back(i);
    }
    trace.final_policy = std::move(pi);
    trace.final_prior = rho;
    trace.iterations_run = i + 1;
    prev_total = objective.total;

    rho = std::move(next);
    if (cfg.record_priors) {
      trace.prior_history.push_back(rho);
    }
    if (stop_w2 || stop_objective) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

}  // namespace miocp
