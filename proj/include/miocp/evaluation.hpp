#pragma once

#include <Eigen/Dense>
#include <vector>

#include "miocp/prior_update.hpp"
#include "miocp/problem.hpp"

namespace miocp {

struct StepCost {
  double quadratic = 0.0;
  double kl = 0.0;  // epsilon-scaled
};

struct ObjectiveBreakdown {
  double quadratic_cost = 0.0;
  double kl_cost = 0.0;  // epsilon-scaled
  double terminal_cost = 0.0;
  double total = 0.0;
  std::vector<StepCost> per_step;
};

// Exact objective under closed-loop Gaussian moments. Per step, with
// mu_u = P mu_x + q and Sigma_u = sigma_pi + P Sigma_x Pᵀ:
//   E[½‖u‖²_R]   = ½(mu_uᵀR mu_u + Tr[R Sigma_u])
//   E[D_KL(π(·|x) ‖ ρ)] = ½[log(|Σ_ρ|/|Σ_π|) − m + Tr(Σ_ρ⁻¹Σ_π)
//                          + Tr(Σ_ρ⁻¹ P Σ_x Pᵀ) + ‖μ_ρ − mu_u‖²_{Σ_ρ⁻¹}]
// and terminal E[½‖x_T−μ_fin‖²_F] = ½(‖μ_{x_T}−μ_fin‖²_F + Tr[F Σ_{x_T}]).
ObjectiveBreakdown evaluate_objective(const ValidatedSpec& vs,
                                      const AffinePolicy& policy,
                                      const PriorSequence& prior);
ObjectiveBreakdown evaluate_objective(const ValidatedSpec& vs,
                                      const AffinePolicy& policy,
                                      const PriorSequence& prior,
                                      const StateMoments& moments);

// The expected-KL closed form above for one step; the Tr(Σ_ρ⁻¹PΣ_xPᵀ)
// term accounts for the x-dependent policy mean.
double expected_policy_prior_kl(const Eigen::MatrixXd& P,
                                const Eigen::VectorXd& q,
                                const Eigen::MatrixXd& sigma_pi,
                                const Gaussian& prior,
                                const Eigen::VectorXd& mu_x,
                                const Eigen::MatrixXd& sigma_x);

// ½ log(|Σ_π + PΣ_xPᵀ| / |Σ_π|): the state-input mutual information at one
// step, which equals the expected KL against the optimal prior.
double mutual_information(const Eigen::MatrixXd& P,
                          const Eigen::MatrixXd& sigma_pi,
                          const Eigen::MatrixXd& sigma_x);

}  // namespace miocp
