#include "miocp/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace miocp {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

Eigen::LLT<Eigen::MatrixXd> llt_spd(const Eigen::MatrixXd& m,
                                    const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(m));
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(what) + " is not PD");
  }
  return llt;
}

}  // namespace

double expected_policy_prior_kl(const Eigen::MatrixXd& P,
                                const Eigen::VectorXd& q,
                                const Eigen::MatrixXd& sigma_pi,
                                const Gaussian& prior,
                                const Eigen::VectorXd& mu_x,
                                const Eigen::MatrixXd& sigma_x) {
  const int m = prior.dim();
  if (P.rows() != m || P.cols() != mu_x.size() || q.size() != m ||
      sigma_pi.rows() != m || sigma_pi.cols() != m ||
      sigma_x.rows() != mu_x.size() || sigma_x.cols() != mu_x.size()) {
    throw std::invalid_argument("expected_policy_prior_kl: dimension mismatch");
  }
  auto pi_llt = llt_spd(sigma_pi, "sigma_pi");
  const auto l_rho = prior.chol_lower().triangularView<Eigen::Lower>();

  // Tr(Σ_ρ⁻¹Σ_π) = ‖L_ρ⁻¹L_π‖_F²
  const double trace_pi =
      l_rho.solve(Eigen::MatrixXd(pi_llt.matrixL())).squaredNorm();
  // Tr(Σ_ρ⁻¹ PΣ_xPᵀ) = Tr(L_ρ⁻¹ S L_ρ⁻ᵀ) with S = PΣ_xPᵀ
  const Eigen::MatrixXd spread = symmetrized(P * sigma_x * P.transpose());
  const double trace_spread =
      l_rho.solve(Eigen::MatrixXd(l_rho.solve(spread)).transpose()).trace();
  const Eigen::VectorXd gap = prior.mean() - (P * mu_x + q);
  const double maha = l_rho.solve(gap).squaredNorm();

  const double val = 0.5 * (prior.log_det_cov() - log_det_from_llt(pi_llt) - m +
                            trace_pi + trace_spread + maha);
  return std::max(0.0, val);
}

double mutual_information(const Eigen::MatrixXd& P,
                          const Eigen::MatrixXd& sigma_pi,
                          const Eigen::MatrixXd& sigma_x) {
  auto pi_llt = llt_spd(sigma_pi, "sigma_pi");
  auto marg_llt =
      llt_spd(sigma_pi + P * sigma_x * P.transpose(), "input marginal cov");
  return std::max(0.0,
                  0.5 * (log_det_from_llt(marg_llt) - log_det_from_llt(pi_llt)));
}

ObjectiveBreakdown evaluate_objective(const ValidatedSpec& vs,
                                      const AffinePolicy& policy,
                                      const PriorSequence& prior) {
  return evaluate_objective(vs, policy, prior, propagate_moments(vs, policy));
}

ObjectiveBreakdown evaluate_objective(const ValidatedSpec& vs,
                                      const AffinePolicy& policy,
                                      const PriorSequence& prior,
                                      const StateMoments& moments) {
  require_policy_shape(vs, policy);
  require_prior_shape(vs, prior);
  if (static_cast<int>(moments.mu_x.size()) != vs.horizon() + 1) {
    throw std::invalid_argument("evaluate_objective: moments horizon mismatch");
  }
  const ProblemSpec& sp = vs.spec();
  const int T = sp.T;

  ObjectiveBreakdown out;
  out.per_step.resize(T);
  for (int k = 0; k < T; ++k) {
    const Eigen::VectorXd mu_u = policy.P[k] * moments.mu_x[k] + policy.q[k];
    const Eigen::MatrixXd sigma_u =
        policy.sigma_pi[k] +
        policy.P[k] * moments.sigma_x[k] * policy.P[k].transpose();
    const double quad =
        0.5 * (mu_u.dot(sp.R[k] * mu_u) + (sp.R[k] * sigma_u).trace());
    const double kl =
        sp.epsilon *
        expected_policy_prior_kl(policy.P[k], policy.q[k], policy.sigma_pi[k],
                                 prior.at(k), moments.mu_x[k],
                                 moments.sigma_x[k]);
    out.per_step[k] = {quad, kl};
    out.quadratic_cost += quad;
    out.kl_cost += kl;
  }
  const Eigen::VectorXd gap = moments.mu_x[T] - sp.mu_fin;
  out.terminal_cost =
      0.5 * (gap.dot(sp.F * gap) + (sp.F * moments.sigma_x[T]).trace());
  out.total = out.quadratic_cost + out.kl_cost + out.terminal_cost;
  return out;
}

}  // namespace miocp
