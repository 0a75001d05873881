#include "miocp/synthesis.hpp"

#include <stdexcept>
#include <string>

namespace miocp {

namespace {

constexpr double kPiEigFloorTol = 1e-9;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Symmetrizes and floors the spectrum at zero. Lemma-level theory guarantees
// PSD; anything below -tol signals a genuine failure, not roundoff.
Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& m, int k) {
  const Eigen::MatrixXd sym = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("riccati: eigendecomposition failed at k=" +
                             std::to_string(k));
  }
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPiEigFloorTol) {
    throw std::runtime_error("riccati: Pi_k lost positive semidefiniteness at k=" +
                             std::to_string(k) +
                             " (min eigenvalue " + std::to_string(min_eig) + ")");
  }
  if (min_eig >= 0.0) {
    return sym;
  }
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  return symmetrized(es.eigenvectors() * clamped.asDiagonal() *
                     es.eigenvectors().transpose());
}

Eigen::LLT<Eigen::MatrixXd> llt_or_throw(const Eigen::MatrixXd& m,
                                         const char* what, int k) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::logic_error(std::string("riccati: ") + what +
                           " not PD at k=" + std::to_string(k) +
                           "; this cannot happen for validated inputs");
  }
  return llt;
}

}  // namespace

RiccatiSolution solve_riccati(const ValidatedSpec& vs,
                              const PriorSequence& prior) {
  require_prior_shape(vs, prior);
  const ProblemSpec& sp = vs.spec();
  const int T = sp.T;

  RiccatiSolution out;
  out.Pi.resize(T + 1);
  out.r.resize(T + 1);
  out.Gamma.resize(T);
  out.Pi[T] = symmetrized(sp.F);
  out.r[T] = sp.mu_fin;

  for (int k = T - 1; k >= 0; --k) {
    const Eigen::MatrixXd& A = sp.A[k];
    const Eigen::MatrixXd& B = sp.B[k];
    const Eigen::MatrixXd& Pi_next = out.Pi[k + 1];
    const Gaussian& rho = prior.at(k);

    const Eigen::MatrixXd BtPi = B.transpose() * Pi_next;  // m x n
    const Eigen::MatrixXd BtPiB = BtPi * B;
    const Eigen::MatrixXd BtPiA = BtPi * A;
    const Eigen::MatrixXd AtPiA = A.transpose() * Pi_next * A;

    // R + BᵀΠB + εΣ_ρ⁻¹
    const Eigen::MatrixXd inner =
        symmetrized(sp.R[k] + BtPiB + sp.epsilon * rho.precision());
    auto inner_llt = llt_or_throw(inner, "R + B'Pi B + eps*inv(Sigma_rho)", k);
    out.Pi[k] = floor_psd(AtPiA - BtPiA.transpose() * inner_llt.solve(BtPiA), k);

    // Prior-free curvature (same step with the eps term dropped).
    const Eigen::MatrixXd lqr_inner = symmetrized(sp.R[k] + BtPiB);
    auto lqr_llt = llt_or_throw(lqr_inner, "R + B'Pi B", k);
    out.Gamma[k] =
        symmetrized(AtPiA - BtPiA.transpose() * lqr_llt.solve(BtPiA));

    // r_k; Pi_k is needed here, so it is computed first at the same k.
    Eigen::PartialPivLU<Eigen::MatrixXd> a_lu(A);
    Eigen::VectorXd r = a_lu.solve(out.r[k + 1]);
    if (!rho.mean().isZero(0.0)) {
      // {Σ_ρ(R + BᵀΠB) + εI}⁻¹ μ_ρ  (not symmetric, plain LU solve)
      Eigen::MatrixXd mix = rho.cov() * lqr_inner;
      mix.diagonal().array() += sp.epsilon;
      const Eigen::VectorXd v =
          Eigen::PartialPivLU<Eigen::MatrixXd>(mix).solve(rho.mean());
      const Eigen::VectorXd w = A.transpose() * (Pi_next * (B * v));
      Eigen::LLT<Eigen::MatrixXd> pi_llt(out.Pi[k]);
      if (pi_llt.info() != Eigen::Success) {
        throw std::runtime_error(
            "riccati: Pi_k singular at k=" + std::to_string(k) +
            " while solving for r_k; requires invertible A_k");
      }
      r -= sp.epsilon * pi_llt.solve(w);
    }
    out.r[k] = r;
  }
  return out;
}

Eigen::MatrixXd woodbury_step_check(const ValidatedSpec& vs,
                                    const PriorSequence& prior, int k,
                                    const Eigen::MatrixXd& Pi_next) {
  require_prior_shape(vs, prior);
  if (k < 0 || k >= vs.horizon()) {
    throw std::invalid_argument("woodbury_step_check: k out of range");
  }
  const ProblemSpec& sp = vs.spec();
  const Eigen::MatrixXd& A = sp.A[k];
  const Eigen::MatrixXd& B = sp.B[k];

  const Eigen::MatrixXd root = sqrtm_psd(Pi_next);
  const Eigen::MatrixXd mid =
      symmetrized(sp.epsilon * prior.at(k).precision() + sp.R[k]);
  auto mid_llt = llt_or_throw(mid, "eps*inv(Sigma_rho) + R", k);
  const Eigen::MatrixXd root_b = root * B;  // n x m
  const Eigen::MatrixXd core =
      symmetrized(Eigen::MatrixXd::Identity(Pi_next.rows(), Pi_next.cols()) +
                  root_b * mid_llt.solve(root_b.transpose()));
  auto core_llt = llt_or_throw(core, "I + S B (eps*inv(Sigma_rho)+R)^-1 B' S", k);
  const Eigen::MatrixXd root_a = root * A;
  return symmetrized(root_a.transpose() * core_llt.solve(root_a));
}

PolicyGaussianPieces policy_pieces(const ValidatedSpec& vs,
                                   const RiccatiSolution& ric) {
  const ProblemSpec& sp = vs.spec();
  const int T = sp.T;
  const int m = vs.input_dim();

  PolicyGaussianPieces pieces;
  pieces.gain.resize(T);
  pieces.offset.resize(T);
  pieces.sigma_Q.resize(T);

  for (int k = 0; k < T; ++k) {
    const Eigen::MatrixXd& A = sp.A[k];
    const Eigen::MatrixXd& B = sp.B[k];
    const Eigen::MatrixXd& Pi_next = ric.Pi[k + 1];

    const Eigen::MatrixXd inner =
        symmetrized(sp.R[k] + B.transpose() * Pi_next * B);
    auto inner_llt = llt_or_throw(inner, "R + B'Pi B", k);
    // K = (R + BᵀΠB)⁻¹BᵀΠA;  mu_Q(x) = -K (x - A⁻¹r_{k+1})
    const Eigen::MatrixXd K = inner_llt.solve(B.transpose() * Pi_next * A);
    const Eigen::VectorXd target =
        Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(ric.r[k + 1]);
    pieces.gain[k] = -K;
    pieces.offset[k] = K * target;
    pieces.sigma_Q[k] = symmetrized(
        sp.epsilon * inner_llt.solve(Eigen::MatrixXd::Identity(m, m)));
  }
  return pieces;
}

namespace {

AffinePolicy blend_with_prior(const ValidatedSpec& vs,
                              const PriorSequence& prior,
                              const PolicyGaussianPieces& pieces) {
  const int T = vs.horizon();
  AffinePolicy policy;
  policy.P.resize(T);
  policy.q.resize(T);
  policy.sigma_pi.resize(T);
  for (int k = 0; k < T; ++k) {
    const Gaussian& rho = prior.at(k);
    const Eigen::MatrixXd& sigma_q = pieces.sigma_Q[k];
    const Eigen::MatrixXd sum = symmetrized(rho.cov() + sigma_q);
    auto sum_llt = llt_or_throw(sum, "Sigma_rho + Sigma_Q", k);
    const Eigen::MatrixXd si_rho = sum_llt.solve(rho.cov());  // (Σρ+ΣQ)⁻¹Σρ
    const Eigen::MatrixXd si_q = sum_llt.solve(sigma_q);      // (Σρ+ΣQ)⁻¹ΣQ

    policy.P[k] = si_rho.transpose() * pieces.gain[k];
    policy.q[k] =
        si_q.transpose() * rho.mean() + si_rho.transpose() * pieces.offset[k];
    const Eigen::MatrixXd sigma_pi = symmetrized(rho.cov() * si_q);
    if (Eigen::LLT<Eigen::MatrixXd>(sigma_pi).info() != Eigen::Success) {
      throw std::runtime_error("optimal_policy: sigma_pi not PD at k=" +
                               std::to_string(k));
    }
    policy.sigma_pi[k] = sigma_pi;
  }
  return policy;
}

}  // namespace

AffinePolicy optimal_policy(const ValidatedSpec& vs,
                            const PriorSequence& prior) {
  const RiccatiSolution ric = solve_riccati(vs, prior);
  const PolicyGaussianPieces pieces = policy_pieces(vs, ric);
  return blend_with_prior(vs, prior, pieces);
}

AffinePolicy meocp_policy(const ValidatedSpec& vs) {
  const ProblemSpec& sp = vs.spec();
  const int T = sp.T;

  // Plain recursion: no prior-precision term, r contracts through A only.
  RiccatiSolution ric;
  ric.Pi.resize(T + 1);
  ric.r.resize(T + 1);
  ric.Pi[T] = symmetrized(sp.F);
  ric.r[T] = sp.mu_fin;
  for (int k = T - 1; k >= 0; --k) {
    const Eigen::MatrixXd& A = sp.A[k];
    const Eigen::MatrixXd& B = sp.B[k];
    const Eigen::MatrixXd& Pi_next = ric.Pi[k + 1];
    const Eigen::MatrixXd BtPiA = B.transpose() * Pi_next * A;
    const Eigen::MatrixXd inner =
        symmetrized(sp.R[k] + B.transpose() * Pi_next * B);
    auto inner_llt = llt_or_throw(inner, "R + B'Pi B", k);
    ric.Pi[k] = floor_psd(
        A.transpose() * Pi_next * A - BtPiA.transpose() * inner_llt.solve(BtPiA),
        k);
    ric.r[k] = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(ric.r[k + 1]);
  }

  const PolicyGaussianPieces pieces = policy_pieces(vs, ric);
  AffinePolicy policy;
  policy.P = pieces.gain;
  policy.q = pieces.offset;
  policy.sigma_pi.resize(T);
  for (int k = 0; k < T; ++k) {
    if (Eigen::LLT<Eigen::MatrixXd>(pieces.sigma_Q[k]).info() !=
        Eigen::Success) {
      throw std::runtime_error("meocp_policy: sigma_Q not PD at k=" +
                               std::to_string(k));
    }
    policy.sigma_pi[k] = pieces.sigma_Q[k];
  }
  return policy;
}

}  // namespace miocp
