#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "miocp/problem.hpp"

namespace miocp {

// Flat storage of num_paths closed-loop trajectories. Row p holds path p;
// state k occupies columns [k*n, (k+1)*n), input k columns [k*m, (k+1)*m).
struct RolloutBatch {
  int num_paths = 0;
  int horizon = 0;
  int state_dim = 0;
  int input_dim = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd states;  // num_paths x (horizon+1)*state_dim
  Eigen::MatrixXd inputs;  // num_paths x horizon*input_dim

  Eigen::VectorXd state(int path, int k) const {
    return states.row(path).segment(k * state_dim, state_dim);
  }
  Eigen::VectorXd input(int path, int k) const {
    return inputs.row(path).segment(k * input_dim, input_dim);
  }
};

// Simulates x_{k+1} = A_k x_k + B_k u_k + w_k with u_k ~ N(P_k x_k + q_k,
// sigma_pi_k), w_k ~ N(0, sigma_w_k), x_0 ~ N(mu_ini, sigma_ini). Path p
// draws from the substream (seed, p), so the batch is bit-identical for any
// degree of parallelism. Per path the draw order is x_0, then u_k, w_k for
// k = 0..T-1.
RolloutBatch rollout(const ValidatedSpec& vs, const AffinePolicy& policy,
                     int num_paths, std::uint64_t seed);
RolloutBatch rollout(const ValidatedSpec& vs, const AffinePolicy& policy,
                     int num_paths, std::uint64_t seed, int num_threads);

struct RegressionLine {
  double slope = 0.0;
  double intercept = 0.0;
};

// OLS of terminal coordinate coord_y on coord_x; throws if the regressor
// has zero variance.
RegressionLine terminal_regression(const RolloutBatch& batch, int coord_x,
                                   int coord_y);

// Parallelism cap from MIOCP_THREADS, falling back to the hardware count.
int env_thread_cap();

}  // namespace miocp
