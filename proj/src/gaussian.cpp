#include "miocp/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace miocp {

namespace {

constexpr double kPsdEigTol = 1e-10;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

Gaussian::Gaussian(Eigen::VectorXd mean, const Eigen::MatrixXd& cov)
    : mean_(std::move(mean)) {
  const Eigen::Index d = mean_.size();
  if (d == 0) {
    throw std::invalid_argument("Gaussian: dimension must be positive");
  }
  if (cov.rows() != d || cov.cols() != d) {
    throw std::invalid_argument(
        "Gaussian: covariance is " + std::to_string(cov.rows()) + "x" +
        std::to_string(cov.cols()) + " but mean has length " +
        std::to_string(d));
  }
  cov_ = symmetrized(cov);
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "Gaussian: covariance is not positive definite");
  }
  chol_lower_ = llt.matrixL();
  log_det_cov_ = 2.0 * chol_lower_.diagonal().array().log().sum();
}

Eigen::MatrixXd Gaussian::precision() const {
  const Eigen::MatrixXd inv_l = chol_lower_.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(dim(), dim()));
  return inv_l.transpose() * inv_l;  // (L⁻¹)ᵀL⁻¹, symmetric by construction
}

double Gaussian::log_pdf(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) {
    throw std::invalid_argument("Gaussian::log_pdf: dimension mismatch");
  }
  const Eigen::VectorXd whitened =
      chol_lower_.triangularView<Eigen::Lower>().solve((x - mean_).eval());
  return -0.5 * (dim() * std::log(2.0 * std::numbers::pi) + log_det_cov_ +
                 whitened.squaredNorm());
}

Eigen::VectorXd Gaussian::sample_one(RandomStream& rng) const {
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) {
    z[i] = rng.normal();
  }
  return mean_ + chol_lower_.triangularView<Eigen::Lower>() * z;
}

double kl_divergence(const Gaussian& p, const Gaussian& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("kl_divergence: dimension mismatch");
  }
  const auto lq = q.chol_lower().triangularView<Eigen::Lower>();
  // Tr(Σ_q⁻¹Σ_p) = ‖L_q⁻¹L_p‖_F²
  const double trace_term = lq.solve(p.chol_lower()).squaredNorm();
  const double maha =
      lq.solve((q.mean() - p.mean()).eval()).squaredNorm();
  const double val = 0.5 * (q.log_det_cov() - p.log_det_cov() - p.dim() +
                            trace_term + maha);
  return std::max(0.0, val);
}

Gaussian product(const Gaussian& p, const Gaussian& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("product: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(p.cov() + q.cov()));
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("product: Σ₁+Σ₂ not PD");
  }
  const Eigen::MatrixXd si_p = llt.solve(p.cov());  // (Σ₁+Σ₂)⁻¹Σ₁
  const Eigen::MatrixXd si_q = llt.solve(q.cov());  // (Σ₁+Σ₂)⁻¹Σ₂
  const Eigen::VectorXd mean =
      si_q.transpose() * p.mean() + si_p.transpose() * q.mean();
  return Gaussian(mean, p.cov() * si_q);
}

double wasserstein2_sq(const Gaussian& p, const Gaussian& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("wasserstein2_sq: dimension mismatch");
  }
  const Eigen::MatrixXd root_q = sqrtm_psd(q.cov());
  const Eigen::MatrixXd cross = sqrtm_psd(root_q * p.cov() * root_q);
  const double val = (p.mean() - q.mean()).squaredNorm() +
                     (p.cov() + q.cov() - 2.0 * cross).trace();
  return std::max(0.0, val);
}

std::vector<Eigen::VectorXd> sample(const Gaussian& p, RandomStream& rng,
                                    int count) {
  if (count < 1) {
    throw std::invalid_argument("sample: count must be >= 1");
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(p.sample_one(rng));
  }
  return out;
}

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("sqrtm_psd: matrix must be square");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sqrtm_psd: eigendecomposition failed");
  }
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPsdEigTol) {
    throw std::invalid_argument("sqrtm_psd: matrix is not PSD (min eigenvalue " +
                                std::to_string(min_eig) + ")");
  }
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrized(es.eigenvectors() * roots.asDiagonal() *
                     es.eigenvectors().transpose());
}

}  // namespace miocp
