#pragma once

#include <Eigen/Dense>
#include <vector>

#include "miocp/problem.hpp"

namespace miocp {

// Closed-loop state mean/covariance, indexed 0..T.
struct StateMoments {
  std::vector<Eigen::VectorXd> mu_x;
  std::vector<Eigen::MatrixXd> sigma_x;
};

// Forward recursion under the affine-Gaussian policy:
//   mu_{k+1}    = (A_k + B_k P_k) mu_k + B_k q_k
//   Sigma_{k+1} = (A_k + B_k P_k) Sigma_k (A_k + B_k P_k)ᵀ
//                 + B_k sigma_pi_k B_kᵀ + sigma_w_k
StateMoments propagate_moments(const ValidatedSpec& vs,
                               const AffinePolicy& policy);

// Optimal prior for a fixed policy: the marginal of u_k,
//   rho_k = N(P_k mu_k + q_k, sigma_pi_k + P_k Sigma_k P_kᵀ).
PriorSequence optimal_prior(const ValidatedSpec& vs,
                            const AffinePolicy& policy);
PriorSequence optimal_prior(const ValidatedSpec& vs, const AffinePolicy& policy,
                            const StateMoments& moments);

}  // namespace miocp
