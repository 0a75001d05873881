#include "miocp/montecarlo.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "miocp/random.hpp"

namespace miocp {

int env_thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("MIOCP_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) cap = requested;
  }
  return cap;
}

RolloutBatch rollout(const ValidatedSpec& vs, const AffinePolicy& policy,
                     int num_paths, std::uint64_t seed) {
  return rollout(vs, policy, num_paths, seed, env_thread_cap());
}

RolloutBatch rollout(const ValidatedSpec& vs, const AffinePolicy& policy,
                     int num_paths, std::uint64_t seed, int num_threads) {
  require_policy_shape(vs, policy);
  if (num_paths < 1) {
    throw std::invalid_argument("rollout: num_paths must be >= 1");
  }
  const ProblemSpec& sp = vs.spec();
  const int T = sp.T;
  const int n = vs.state_dim();
  const int m = vs.input_dim();

  // Cholesky factors up front; the per-path loop only does triangular
  // products.
  const auto chol = [](const Eigen::MatrixXd& cov, const std::string& what) {
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (cov + cov.transpose()));
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("rollout: " + what + " is not PD");
    }
    return Eigen::MatrixXd(llt.matrixL());
  };
  const Eigen::MatrixXd l_ini = chol(sp.sigma_ini, "sigma_ini");
  std::vector<Eigen::MatrixXd> l_pi(T), l_w(T);
  for (int k = 0; k < T; ++k) {
    l_pi[k] = chol(policy.sigma_pi[k], "sigma_pi[" + std::to_string(k) + "]");
    l_w[k] = chol(sp.sigma_w[k], "sigma_w[" + std::to_string(k) + "]");
  }

  RolloutBatch batch;
  batch.num_paths = num_paths;
  batch.horizon = T;
  batch.state_dim = n;
  batch.input_dim = m;
  batch.seed = seed;
  batch.states.resize(num_paths, (T + 1) * n);
  batch.inputs.resize(num_paths, T * m);

  const auto run_range = [&](int begin, int end) {
    Eigen::VectorXd z_n(n), z_m(m);
    for (int p = begin; p < end; ++p) {
      RandomStream rng(seed, static_cast<std::uint64_t>(p));
      const auto draw = [&rng](Eigen::VectorXd& z) {
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
      };
      draw(z_n);
      Eigen::VectorXd x = sp.mu_ini + l_ini * z_n;
      batch.states.row(p).segment(0, n) = x;
      for (int k = 0; k < T; ++k) {
        draw(z_m);
        const Eigen::VectorXd u =
            policy.P[k] * x + policy.q[k] + l_pi[k] * z_m;
        batch.inputs.row(p).segment(k * m, m) = u;
        draw(z_n);
        x = sp.A[k] * x + sp.B[k] * u + l_w[k] * z_n;
        batch.states.row(p).segment((k + 1) * n, n) = x;
      }
    }
  };

  const int threads = std::clamp(num_threads, 1, num_paths);
  if (threads == 1) {
    run_range(0, num_paths);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (num_paths + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(num_paths, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return batch;
}

RegressionLine terminal_regression(const RolloutBatch& batch, int coord_x,
                                   int coord_y) {
  if (batch.num_paths < 1) {
    throw std::invalid_argument("terminal_regression: empty batch");
  }
  if (coord_x < 0 || coord_x >= batch.state_dim || coord_y < 0 ||
      coord_y >= batch.state_dim) {
    throw std::invalid_argument("terminal_regression: coordinate out of range");
  }
  const int off = batch.horizon * batch.state_dim;
  const Eigen::VectorXd xs = batch.states.col(off + coord_x);
  const Eigen::VectorXd ys = batch.states.col(off + coord_y);
  const double mean_x = xs.mean();
  const double mean_y = ys.mean();
  const Eigen::VectorXd dx = (xs.array() - mean_x).matrix();
  const double var_x = dx.squaredNorm();
  if (var_x <= 0.0) {
    throw std::invalid_argument(
        "terminal_regression: regressor coordinate has zero variance (need "
        "at least two distinct terminal states)");
  }
  const Eigen::VectorXd dy = (ys.array() - mean_y).matrix();
  const double cov_xy = dx.dot(dy);
  RegressionLine line;
  line.slope = cov_xy / var_x;
  line.intercept = mean_y - line.slope * mean_x;
  return line;
}

}  // namespace miocp
