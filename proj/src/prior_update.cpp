#include "miocp/prior_update.hpp"

#include <stdexcept>

namespace miocp {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

StateMoments propagate_moments(const ValidatedSpec& vs,
                               const AffinePolicy& policy) {
  require_policy_shape(vs, policy);
  const ProblemSpec& sp = vs.spec();
  const int T = sp.T;

  StateMoments moments;
  moments.mu_x.resize(T + 1);
  moments.sigma_x.resize(T + 1);
  moments.mu_x[0] = sp.mu_ini;
  moments.sigma_x[0] = symmetrized(sp.sigma_ini);

  for (int k = 0; k < T; ++k) {
    const Eigen::MatrixXd closed = sp.A[k] + sp.B[k] * policy.P[k];
    moments.mu_x[k + 1] = closed * moments.mu_x[k] + sp.B[k] * policy.q[k];
    moments.sigma_x[k + 1] =
        symmetrized(closed * moments.sigma_x[k] * closed.transpose() +
                    sp.B[k] * policy.sigma_pi[k] * sp.B[k].transpose() +
                    sp.sigma_w[k]);
  }
  return moments;
}

PriorSequence optimal_prior(const ValidatedSpec& vs,
                            const AffinePolicy& policy) {
  return optimal_prior(vs, policy, propagate_moments(vs, policy));
}

PriorSequence optimal_prior(const ValidatedSpec& vs, const AffinePolicy& policy,
                            const StateMoments& moments) {
  require_policy_shape(vs, policy);
  if (static_cast<int>(moments.mu_x.size()) != vs.horizon() + 1) {
    throw std::invalid_argument("optimal_prior: moments horizon mismatch");
  }
  PriorSequence prior;
  prior.priors.reserve(vs.horizon());
  for (int k = 0; k < vs.horizon(); ++k) {
    const Eigen::VectorXd mean = policy.P[k] * moments.mu_x[k] + policy.q[k];
    const Eigen::MatrixXd cov =
        policy.sigma_pi[k] +
        policy.P[k] * moments.sigma_x[k] * policy.P[k].transpose();
    prior.priors.emplace_back(mean, cov);  // Gaussian symmetrizes and checks PD
  }
  return prior;
}

}  // namespace miocp
