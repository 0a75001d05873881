#include <cmath>

#include "doctest.h"
#include "miocp/evaluation.hpp"
#include "miocp/montecarlo.hpp"
#include "miocp/prior_update.hpp"
#include "miocp/solver.hpp"
#include "test_util.hpp"

using namespace miocp;
using namespace miocp::testutil;

TEST_SUITE_BEGIN("prior_update");

TEST_CASE("open-loop identity dynamics adds the input covariance once") {
  ProblemSpec sp;
  sp.T = 1;
  sp.A.assign(1, Eigen::MatrixXd::Identity(2, 2));
  sp.B.assign(1, Eigen::MatrixXd::Identity(2, 2));
  sp.sigma_w.assign(1, 1e-12 * Eigen::MatrixXd::Identity(2, 2));
  sp.R.assign(1, Eigen::MatrixXd::Identity(2, 2));
  sp.F = Eigen::MatrixXd::Identity(2, 2);
  sp.epsilon = 1.0;
  sp.mu_ini = Eigen::VectorXd::Constant(2, 0.7);
  sp.sigma_ini = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  sp.mu_fin = Eigen::VectorXd::Zero(2);
  const ValidatedSpec vs = validate(sp);

  AffinePolicy policy;
  const double input_var = 0.09;
  policy.P.assign(1, Eigen::MatrixXd::Zero(2, 2));
  policy.q.assign(1, Eigen::VectorXd::Zero(2));
  policy.sigma_pi.assign(1, input_var * Eigen::MatrixXd::Identity(2, 2));

  const StateMoments moments = propagate_moments(vs, policy);
  CHECK((moments.mu_x[1] - sp.mu_ini).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(max_abs_diff(moments.sigma_x[1],
                     sp.sigma_ini +
                         input_var * Eigen::MatrixXd::Identity(2, 2)) < 1e-11);
}

TEST_CASE("moment recursion matches Monte Carlo rollouts") {
  RandomStream rng(700);
  const int n = 2, m = 2, T = 4;
  const ProblemSpec sp = random_spec(rng, n, m, T, 1.0);
  const ValidatedSpec vs = validate(sp);
  const AffinePolicy policy = random_policy(rng, n, m, T);
  const StateMoments moments = propagate_moments(vs, policy);

  const int num_paths = 100000;
  const RolloutBatch batch = rollout(vs, policy, num_paths, 17);
  for (int k = 0; k <= T; ++k) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (int p = 0; p < num_paths; ++p) mean += batch.state(p, k);
    mean /= num_paths;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (int p = 0; p < num_paths; ++p) {
      const Eigen::VectorXd d = batch.state(p, k) - mean;
      cov += d * d.transpose();
    }
    cov /= (num_paths - 1);

    for (int i = 0; i < n; ++i) {
      const double se = std::sqrt(moments.sigma_x[k](i, i) / num_paths);
      CHECK(std::abs(mean[i] - moments.mu_x[k][i]) <= 4.0 * se);
      for (int j = 0; j < n; ++j) {
        const double se_cov =
            std::sqrt((moments.sigma_x[k](i, i) * moments.sigma_x[k](j, j) +
                       moments.sigma_x[k](i, j) * moments.sigma_x[k](i, j)) /
                      num_paths);
        CHECK(std::abs(cov(i, j) - moments.sigma_x[k](i, j)) <= 4.0 * se_cov);
      }
    }
  }
}

TEST_CASE("state covariance dominates the accumulated process noise") {
  RandomStream rng(701);
  const ProblemSpec sp = random_spec(rng, 3, 2, 5, 0.9);
  const ValidatedSpec vs = validate(sp);
  const AffinePolicy policy = random_policy(rng, 3, 2, 5);
  const StateMoments moments = propagate_moments(vs, policy);
  for (int k = 0; k < 5; ++k) {
    CHECK(min_eigenvalue(moments.sigma_x[k + 1] - sp.sigma_w[k]) >= -1e-12);
  }
}

TEST_CASE("state-independent policy marginalizes to itself") {
  RandomStream rng(702);
  const int n = 2, m = 2, T = 3;
  const ProblemSpec sp = random_spec(rng, n, m, T, 1.0);
  const ValidatedSpec vs = validate(sp);
  AffinePolicy policy = random_policy(rng, n, m, T);
  for (auto& p : policy.P) p.setZero();

  const PriorSequence prior = optimal_prior(vs, policy);
  for (int k = 0; k < T; ++k) {
    CHECK((prior.at(k).mean() - policy.q[k]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(max_abs_diff(prior.at(k).cov(), policy.sigma_pi[k]) < 1e-14);
  }
}

TEST_CASE("scalar substitution example") {
  // P=1, q=0, sigma_pi=1 with state moments (2, 3) gives N(2, 4)
  ProblemSpec sp;
  sp.T = 1;
  sp.A.assign(1, Eigen::MatrixXd::Identity(1, 1));
  sp.B.assign(1, Eigen::MatrixXd::Identity(1, 1));
  sp.sigma_w.assign(1, Eigen::MatrixXd::Identity(1, 1));
  sp.R.assign(1, Eigen::MatrixXd::Identity(1, 1));
  sp.F = Eigen::MatrixXd::Identity(1, 1);
  sp.epsilon = 1.0;
  sp.mu_ini = Eigen::VectorXd::Constant(1, 2.0);
  sp.sigma_ini = 3.0 * Eigen::MatrixXd::Identity(1, 1);
  sp.mu_fin = Eigen::VectorXd::Zero(1);
  const ValidatedSpec vs = validate(sp);

  AffinePolicy policy;
  policy.P.assign(1, Eigen::MatrixXd::Identity(1, 1));
  policy.q.assign(1, Eigen::VectorXd::Zero(1));
  policy.sigma_pi.assign(1, Eigen::MatrixXd::Identity(1, 1));

  const PriorSequence prior = optimal_prior(vs, policy);
  CHECK(prior.at(0).mean()[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(prior.at(0).cov()(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("optimal prior matches the empirical input marginal") {
  RandomStream rng(703);
  const int n = 2, m = 1, T = 4;
  const ProblemSpec sp = random_spec(rng, n, m, T, 1.0);
  const ValidatedSpec vs = validate(sp);
  const AffinePolicy policy = random_policy(rng, n, m, T);
  const PriorSequence prior = optimal_prior(vs, policy);

  const int num_paths = 100000;
  const RolloutBatch batch = rollout(vs, policy, num_paths, 23);
  for (int k = 0; k < T; ++k) {
    double mean = 0.0;
    for (int p = 0; p < num_paths; ++p) mean += batch.inputs(p, k);
    mean /= num_paths;
    double var = 0.0;
    for (int p = 0; p < num_paths; ++p) {
      const double d = batch.inputs(p, k) - mean;
      var += d * d;
    }
    var /= (num_paths - 1);

    const double target_mean = prior.at(k).mean()[0];
    const double target_var = prior.at(k).cov()(0, 0);
    CHECK(std::abs(mean - target_mean) <=
          4.0 * std::sqrt(target_var / num_paths));
    CHECK(std::abs(var - target_var) <=
          4.0 * std::sqrt(2.0 * target_var * target_var / num_paths));
  }
}

TEST_CASE("prior covariance dominates the policy covariance") {
  RandomStream rng(704);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 3);
    const int m = 1 + static_cast<int>(rng.next_u64() % 3);
    const int T = 1 + static_cast<int>(rng.next_u64() % 4);
    const ProblemSpec sp = random_spec(rng, n, m, T, 1.0);
    const ValidatedSpec vs = validate(sp);
    const AffinePolicy policy = random_policy(rng, n, m, T);
    const StateMoments moments = propagate_moments(vs, policy);
    const PriorSequence prior = optimal_prior(vs, policy, moments);
    for (int k = 0; k < T; ++k) {
      const Eigen::MatrixXd gap = prior.at(k).cov() - policy.sigma_pi[k];
      CHECK(min_eigenvalue(gap) >= -1e-12);
      const Eigen::MatrixXd spread =
          policy.P[k] * moments.sigma_x[k] * policy.P[k].transpose();
      if (spread.norm() < 1e-14) {
        CHECK(gap.cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("optimal prior minimizes the expected KL among Gaussians") {
  RandomStream rng(705);
  const int n = 1, m = 1, T = 2;
  const ProblemSpec sp = random_spec(rng, n, m, T, 1.0);
  const ValidatedSpec vs = validate(sp);
  const AffinePolicy policy = random_policy(rng, n, m, T);
  const StateMoments moments = propagate_moments(vs, policy);
  const PriorSequence best = optimal_prior(vs, policy, moments);

  for (int k = 0; k < T; ++k) {
    const double kl_best = expected_policy_prior_kl(
        policy.P[k], policy.q[k], policy.sigma_pi[k], best.at(k),
        moments.mu_x[k], moments.sigma_x[k]);
    for (int trial = 0; trial < 50; ++trial) {
      const double dm = 0.3 * (2.0 * rng.uniform_open01() - 1.0);
      const double ds = 0.3 * (2.0 * rng.uniform_open01() - 1.0);
      const Gaussian perturbed(
          best.at(k).mean() + Eigen::VectorXd::Constant(1, dm),
          best.at(k).cov() +
              Eigen::MatrixXd::Constant(
                  1, 1, std::max(ds, 1e-3 - best.at(k).cov()(0, 0))));
      const double kl = expected_policy_prior_kl(
          policy.P[k], policy.q[k], policy.sigma_pi[k], perturbed,
          moments.mu_x[k], moments.sigma_x[k]);
      CHECK(kl >= kl_best - 1e-12);
    }
  }
}

TEST_CASE("expected KL against the optimal prior equals mutual information") {
  RandomStream rng(706);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 3);
    const int m = 1 + static_cast<int>(rng.next_u64() % 3);
    const Eigen::MatrixXd P = random_matrix(rng, m, n);
    const Eigen::VectorXd q = random_vector(rng, m);
    const Eigen::MatrixXd sigma_pi = random_spd(rng, m);
    const Eigen::VectorXd mu_x = random_vector(rng, n);
    const Eigen::MatrixXd sigma_x = random_spd(rng, n);

    const Gaussian rho(P * mu_x + q,
                       sigma_pi + P * sigma_x * P.transpose());
    const double ekl =
        expected_policy_prior_kl(P, q, sigma_pi, rho, mu_x, sigma_x);
    const double mi = mutual_information(P, sigma_pi, sigma_x);
    CHECK(std::abs(ekl - mi) <= 1e-8);
  }
}

TEST_SUITE_END();
