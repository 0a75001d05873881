#pragma once

#include <Eigen/Dense>
#include <vector>

#include "miocp/random.hpp"

namespace miocp {

// Multivariate normal with strictly positive definite covariance.
// The covariance is symmetrized on construction and Cholesky-factorized once;
// construction throws if the factorization fails, so every live Gaussian is
// usable for sampling, log-densities and solves. Immutable after
// construction and safe to share across threads.
class Gaussian {
 public:
  Gaussian(Eigen::VectorXd mean, const Eigen::MatrixXd& cov);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  // Lower Cholesky factor L with cov = L Lᵀ.
  const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }
  double log_det_cov() const { return log_det_cov_; }

  // Σ⁻¹, assembled from triangular solves against the stored factor.
  Eigen::MatrixXd precision() const;

  double log_pdf(const Eigen::VectorXd& x) const;

  // One draw μ + L z with z standard normal; consumes dim() normals from rng.
  Eigen::VectorXd sample_one(RandomStream& rng) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_lower_;
  double log_det_cov_ = 0.0;
};

// ½[log(|Σ_q|/|Σ_p|) − d + Tr(Σ_q⁻¹Σ_p) + ‖μ_q−μ_p‖²_{Σ_q⁻¹}], clamped at 0.
double kl_divergence(const Gaussian& p, const Gaussian& q);

// Normalized density proportional to the pointwise product of the two
// densities: 𝒩(Σ₂(Σ₁+Σ₂)⁻¹μ₁ + Σ₁(Σ₁+Σ₂)⁻¹μ₂, Σ₁(Σ₁+Σ₂)⁻¹Σ₂).
Gaussian product(const Gaussian& p, const Gaussian& q);

// Squared Wasserstein-2 distance,
// ‖μ_p−μ_q‖² + Tr[Σ_p + Σ_q − 2(Σ_q^{1/2}Σ_pΣ_q^{1/2})^{1/2}].
double wasserstein2_sq(const Gaussian& p, const Gaussian& q);

// count independent draws; deterministic given the stream state.
std::vector<Eigen::VectorXd> sample(const Gaussian& p, RandomStream& rng,
                                    int count);

// Symmetric PSD square root via eigendecomposition, eigenvalues below zero
// clamped; throws if an eigenvalue is below -1e-10.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m);

}  // namespace miocp
