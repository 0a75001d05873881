#pragma once

#include <Eigen/Dense>
#include <vector>

#include "miocp/problem.hpp"

namespace miocp {

// Backward value-function data for a fixed prior. Pi and r are indexed
// 0..T (Pi[T] = F, r[T] = mu_fin); Gamma is the prior-free curvature of the
// one-step Q-function, indexed 0..T-1.
struct RiccatiSolution {
  std::vector<Eigen::MatrixXd> Pi;
  std::vector<Eigen::VectorXd> r;
  std::vector<Eigen::MatrixXd> Gamma;
};

// Gaussian factor multiplying the prior in the optimal policy:
// mu_Q_k(x) = gain_k x + offset_k, covariance sigma_Q_k.
struct PolicyGaussianPieces {
  std::vector<Eigen::MatrixXd> gain;     // T of m x n
  std::vector<Eigen::VectorXd> offset;   // T of m
  std::vector<Eigen::MatrixXd> sigma_Q;  // T of m x m, SPD
};

// Backward recursion
//   Pi_k = A_kᵀPi_{k+1}A_k
//          − A_kᵀPi_{k+1}B_k {R_k + B_kᵀPi_{k+1}B_k + ε Σ_ρk⁻¹}⁻¹ B_kᵀPi_{k+1}A_k
//   r_k  = A_k⁻¹r_{k+1}
//          − ε Pi_k⁻¹A_kᵀPi_{k+1}B_k {Σ_ρk(R_k + B_kᵀPi_{k+1}B_k) + εI}⁻¹ μ_ρk
// with Pi_T = F, r_T = mu_fin. Every Pi_k is symmetrized and its spectrum
// floored at zero (an eigenvalue below -1e-9 is treated as a failure).
RiccatiSolution solve_riccati(const ValidatedSpec& vs,
                              const PriorSequence& prior);

// Equivalent step in Woodbury form,
//   A_kᵀ S {I + S B_k (εΣ_ρk⁻¹ + R_k)⁻¹ B_kᵀ S}⁻¹ S A_k,  S = Pi_{k+1}^{1/2},
// usable as a cross-check of the recursion above or when Pi_{k+1} is
// near-singular.
Eigen::MatrixXd woodbury_step_check(const ValidatedSpec& vs,
                                    const PriorSequence& prior, int k,
                                    const Eigen::MatrixXd& Pi_next);

PolicyGaussianPieces policy_pieces(const ValidatedSpec& vs,
                                   const RiccatiSolution& ric);

// Optimal policy for a fixed prior: per step the normalized product of the
// prior with N(mu_Q_k(x), sigma_Q_k), which stays affine-Gaussian:
//   sigma_pi_k = Σ_ρk(Σ_ρk+Σ_Qk)⁻¹Σ_Qk
//   P_k x + q_k = Σ_Qk(Σ_ρk+Σ_Qk)⁻¹μ_ρk + Σ_ρk(Σ_ρk+Σ_Qk)⁻¹ mu_Q_k(x).
AffinePolicy optimal_policy(const ValidatedSpec& vs,
                            const PriorSequence& prior);

// Maximum-entropy limit (uniform prior): plain Riccati recursion without the
// prior-precision term, r_k = A_k⁻¹r_{k+1}, and the policy N(mu_Q, sigma_Q)
// itself.
AffinePolicy meocp_policy(const ValidatedSpec& vs);

}  // namespace miocp
