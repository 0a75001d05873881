#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "miocp/gaussian.hpp"

namespace miocp {

// Finite-horizon problem data: dynamics x_{k+1} = A_k x_k + B_k u_k + w_k,
// per-step input cost R_k, terminal cost F around mu_fin, KL regularization
// weight epsilon, Gaussian initial state, optional initial prior for the
// solver (broadcast over all steps).
struct ProblemSpec {
  int T = 0;
  std::vector<Eigen::MatrixXd> A;        // T of n x n
  std::vector<Eigen::MatrixXd> B;        // T of n x m
  std::vector<Eigen::MatrixXd> sigma_w;  // T of n x n, SPD
  std::vector<Eigen::MatrixXd> R;        // T of m x m, SPD
  Eigen::MatrixXd F;                     // n x n, SPD
  double epsilon = 0.0;
  Eigen::VectorXd mu_ini;
  Eigen::MatrixXd sigma_ini;  // SPD
  Eigen::VectorXd mu_fin;
  std::optional<Gaussian> prior_init;

  int state_dim() const { return A.empty() ? 0 : static_cast<int>(A[0].rows()); }
  int input_dim() const { return B.empty() ? 0 : static_cast<int>(B[0].cols()); }
};

// Policy class: u_k | x ~ N(P_k x + q_k, sigma_pi_k).
struct AffinePolicy {
  std::vector<Eigen::MatrixXd> P;         // T of m x n
  std::vector<Eigen::VectorXd> q;         // T of m
  std::vector<Eigen::MatrixXd> sigma_pi;  // T of m x m, SPD

  int horizon() const { return static_cast<int>(P.size()); }
};

// Prior class: u_k ~ N(mu_rho_k, sigma_rho_k), state-independent.
struct PriorSequence {
  std::vector<Gaussian> priors;

  int horizon() const { return static_cast<int>(priors.size()); }
  const Gaussian& at(int k) const { return priors.at(k); }

  static PriorSequence constant(const Gaussian& g, int T);
};

// Proof token that a ProblemSpec passed validate(); downstream operations
// only accept this wrapper.
class ValidatedSpec {
 public:
  const ProblemSpec& spec() const { return spec_; }
  const ProblemSpec* operator->() const { return &spec_; }
  int horizon() const { return spec_.T; }
  int state_dim() const { return spec_.state_dim(); }
  int input_dim() const { return spec_.input_dim(); }

 private:
  friend ValidatedSpec validate(ProblemSpec spec);
  explicit ValidatedSpec(ProblemSpec spec) : spec_(std::move(spec)) {}
  ProblemSpec spec_;
};

// Checks every structural and definiteness invariant (lists of length T,
// SPD matrices via Cholesky, invertible A_k via rcond > 1e-12, epsilon > 0).
// Throws std::invalid_argument listing every violation with its time index.
ValidatedSpec validate(ProblemSpec spec);

// JSON config I/O. Per-step fields accept a single matrix (broadcast to all
// T steps) or a list of exactly T matrices.
ProblemSpec load_spec(const std::string& path);
void save_spec(const ProblemSpec& spec, const std::string& path);

// Initial prior for the solver: spec.prior_init broadcast over the horizon,
// or N(0, I_m) when absent.
PriorSequence initial_prior(const ValidatedSpec& vs);

// Shape guards shared by the downstream modules.
void require_policy_shape(const ValidatedSpec& vs, const AffinePolicy& policy);
void require_prior_shape(const ValidatedSpec& vs, const PriorSequence& prior);

}  // namespace miocp
