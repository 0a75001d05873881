#include <cmath>

#include "doctest.h"
#include "miocp/montecarlo.hpp"
#include "miocp/synthesis.hpp"
#include "miocp/prior_update.hpp"
#include "miocp/solver.hpp"
#include "test_util.hpp"

using namespace miocp;
using namespace miocp::testutil;

TEST_SUITE_BEGIN("montecarlo");

TEST_CASE("near-deterministic rollouts follow the noise-free recursion") {
  ProblemSpec sp = benchmark_spec(4.0);
  sp.sigma_ini = 1e-12 * Eigen::MatrixXd::Identity(2, 2);
  sp.sigma_w.assign(sp.T, 1e-12 * Eigen::MatrixXd::Identity(2, 2));
  const ValidatedSpec vs = validate(sp);

  RandomStream rng(100);
  AffinePolicy policy = random_policy(rng, 2, 1, sp.T, 0.1);
  for (auto& s : policy.sigma_pi) s = 1e-12 * Eigen::MatrixXd::Identity(1, 1);

  const RolloutBatch batch = rollout(vs, policy, 3, 0);
  Eigen::VectorXd x = sp.mu_ini;
  for (int k = 0; k <= sp.T; ++k) {
    for (int p = 0; p < 3; ++p) {
      CHECK((batch.state(p, k) - x).cwiseAbs().maxCoeff() <= 1e-4);
    }
    if (k < sp.T) {
      x = (sp.A[k] + sp.B[k] * policy.P[k]) * x + sp.B[k] * policy.q[k];
    }
  }
}

TEST_CASE("same seed twice gives bit-identical batches") {
  const ValidatedSpec vs = validate(benchmark_spec(0.1));
  const AffinePolicy policy = meocp_policy(vs);
  const RolloutBatch a = rollout(vs, policy, 64, 1234);
  const RolloutBatch b = rollout(vs, policy, 64, 1234);
  CHECK((a.states.array() == b.states.array()).all());
  CHECK((a.inputs.array() == b.inputs.array()).all());
}

TEST_CASE("parallel degree does not change the batch") {
  const ValidatedSpec vs = validate(benchmark_spec(4.0));
  const AffinePolicy policy = meocp_policy(vs);
  const RolloutBatch serial = rollout(vs, policy, 101, 7, 1);
  const RolloutBatch parallel = rollout(vs, policy, 101, 7, 8);
  CHECK((serial.states.array() == parallel.states.array()).all());
  CHECK((serial.inputs.array() == parallel.inputs.array()).all());
}

TEST_CASE("terminal mean matches the moment recursion on the benchmark") {
  const ValidatedSpec vs = validate(benchmark_spec(4.0));
  SolveConfig cfg;
  cfg.max_iters = 300;
  const SolveTrace trace = solve(vs, initial_prior(vs), cfg);
  const StateMoments moments = propagate_moments(vs, trace.final_policy);

  const int num_paths = 1000;
  const RolloutBatch batch = rollout(vs, trace.final_policy, num_paths, 3);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (int p = 0; p < num_paths; ++p) mean += batch.state(p, vs.horizon());
  mean /= num_paths;
  for (int i = 0; i < 2; ++i) {
    const double sigma = std::sqrt(moments.sigma_x[vs.horizon()](i, i));
    CHECK(std::abs(mean[i] - moments.mu_x[vs.horizon()][i]) <=
          4.0 * sigma / std::sqrt(static_cast<double>(num_paths)));
  }
}

TEST_CASE("regression on an exact line recovers it") {
  RolloutBatch batch;
  batch.num_paths = 5;
  batch.horizon = 0;
  batch.state_dim = 2;
  batch.input_dim = 1;
  batch.states.resize(5, 2);
  batch.inputs.resize(5, 0);
  for (int p = 0; p < 5; ++p) {
    const double x = 0.5 * p;
    batch.states(p, 0) = x;
    batch.states(p, 1) = 2.0 * x + 1.0;
  }
  const RegressionLine line = terminal_regression(batch, 0, 1);
  CHECK(line.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(line.intercept == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("independent coordinates regress to slope zero") {
  RolloutBatch batch;
  batch.num_paths = 100000;
  batch.horizon = 0;
  batch.state_dim = 2;
  batch.input_dim = 1;
  batch.states.resize(batch.num_paths, 2);
  batch.inputs.resize(batch.num_paths, 0);
  RandomStream rng(42);
  for (int p = 0; p < batch.num_paths; ++p) {
    batch.states(p, 0) = rng.normal();
    batch.states(p, 1) = rng.normal();
  }
  const RegressionLine line = terminal_regression(batch, 0, 1);
  CHECK(std::abs(line.slope) <= 0.02);
}

TEST_CASE("degenerate regressions error out") {
  const ValidatedSpec vs = validate(benchmark_spec(0.1));
  const AffinePolicy policy = meocp_policy(vs);
  const RolloutBatch single = rollout(vs, policy, 1, 0);
  CHECK_THROWS_WITH_AS(terminal_regression(single, 0, 1),
                       doctest::Contains("zero variance"),
                       std::invalid_argument);
  CHECK_THROWS_AS(terminal_regression(single, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(rollout(vs, policy, 0, 0), std::invalid_argument);
}

TEST_SUITE_END();
