#include "eigmala/errors.hpp"
#include "eigmala/linalg.hpp"
#include "eigmala/targets.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace eigmala;

namespace {

// Every target's analytic gradient must match centred finite differences at
// seeded points.
void check_gradient(const TargetModel& target, Rng& rng, double point_scale,
                    const Eigen::VectorXd& centre, double tol = 1e-5) {
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = centre + point_scale * rng.normal_vector(target.dim);
    const Eigen::VectorXd analytic = target.grad_log_density(x);
    const Eigen::VectorXd fd = testutil::fd_gradient(target, x);
    CHECK(testutil::rel_error(analytic, fd) <= tol);
  }
}

}  // namespace

TEST_CASE("tailored gaussian: condition number, mode gradient, leading eigenvector") {
  const Eigen::Index d = 150;
  const TargetModel target = make_tailored_gaussian(d, 1, 2024);
  REQUIRE(target.gaussian.has_value());
  CHECK(*target.condition_number == doctest::Approx(1000.0).epsilon(0.01));

  const Eigen::VectorXd at_mean = target.grad_log_density(target.gaussian->mean);
  CHECK(at_mean.norm() <= 1e-10);

  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(double(d)));
  CHECK((target.gaussian->eigenvectors.col(0) - ones).cwiseAbs().maxCoeff() == 0.0);
  CHECK(target.gaussian->mean[0] == 5.0);
}

TEST_CASE("tailored gaussian metadata reassembles the covariance") {
  const TargetModel target = make_tailored_gaussian(40, 3, 7);
  const auto& g = *target.gaussian;
  const Eigen::MatrixXd sigma =
      g.eigenvectors * g.eigenvalues.asDiagonal() * g.eigenvectors.transpose();
  const SymEig eig = sym_eig(0.5 * (sigma + sigma.transpose()));
  CHECK((eig.values - g.eigenvalues).cwiseAbs().maxCoeff() <= 1e-10 * g.eigenvalues[0]);
  // K=3 leading values near 100, the rest at 0.1.
  for (int i = 0; i < 3; ++i) CHECK(g.eigenvalues[i] == doctest::Approx(100.0).epsilon(0.02));
  for (Eigen::Index i = 3; i < 40; ++i) CHECK(g.eigenvalues[i] == doctest::Approx(0.1));
}

TEST_CASE("tailored gaussian gradient vs finite differences") {
  const TargetModel target = make_tailored_gaussian(25, 2, 11);
  Rng rng(1);
  check_gradient(target, rng, 3.0, target.gaussian->mean);
}

TEST_CASE("diag+low-rank gaussian: spectrum cluster and conditioning") {
  const Eigen::Index d = 200;
  const int rank = 32;
  const TargetModel target = make_diag_lowrank_gaussian(d, rank, 5);
  REQUIRE(target.gaussian.has_value());
  const Eigen::VectorXd& values = target.gaussian->eigenvalues;
  CHECK(values.minCoeff() > 0.0);
  // A cluster of `rank` large eigenvalues: a wide gap between value 32 and 33.
  CHECK(values[rank - 1] / values[rank] > 10.0);
  CHECK(*target.condition_number >= 1e3);
  CHECK(*target.condition_number <= 1e6);
}

TEST_CASE("diag+low-rank gaussian condition numbers over moderate dimensions") {
  // Seeded spot check of the claimed growth band.
  for (const int d : {50, 100, 200}) {
    const TargetModel target = make_diag_lowrank_gaussian(d, 32, 17);
    CHECK(*target.condition_number >= 1e3);
    CHECK(*target.condition_number <= 1e5);
  }
}

TEST_CASE("diag+low-rank gaussian gradient vs finite differences") {
  const TargetModel target = make_diag_lowrank_gaussian(30, 5, 3);
  Rng rng(2);
  check_gradient(target, rng, 2.0, target.gaussian->mean);
}

TEST_CASE("logistic regression: condition number formula and mode") {
  const Eigen::Index d = 20;
  const LogisticRegressionData data = make_logistic_data(d, 2025);
  CHECK(data.x.rows() == d);  // n = d protocol
  for (Eigen::Index i = 0; i < d; ++i) {
    CHECK((data.y[i] == 0.0 || data.y[i] == 1.0));
  }

  const TargetModel target = logistic_target_from_data(data);
  // kappa = kappa(X^T X) (n/4 + lambda) / lambda with kappa(X^T X) ~ 1000.
  const double expected = 1000.0 * (double(d) / 4.0 + 0.01) / 0.01;
  CHECK(*target.condition_number == doctest::Approx(expected).epsilon(0.02));

  REQUIRE(target.mode.has_value());
  CHECK(target.grad_log_density(*target.mode).norm() <= 1e-6);
}

TEST_CASE("logistic regression gradient vs finite differences") {
  const TargetModel target = make_logistic_regression(20, 31);
  Rng rng(3);
  check_gradient(target, rng, 1.0 / std::sqrt(20.0), Eigen::VectorXd::Zero(20));
}

TEST_CASE("xy model: potential on constant configurations") {
  const Eigen::Index d = 12;
  const double beta = 2.5;
  const TargetModel target = xy_mean_field(d, beta);
  // U(lambda * ones) = -d/2, so log density = beta d / 2.
  for (const double lambda : {0.0, 0.7, -2.3}) {
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(d, lambda);
    CHECK(target.log_density(theta) == doctest::Approx(beta * double(d) / 2.0).epsilon(1e-12));
    CHECK(target.grad_log_density(theta).norm() <= 1e-12);
  }
}

TEST_CASE("xy model: O(d) gradient matches the double-sum oracle") {
  const Eigen::Index d = 10;
  const double beta = 4.0;
  const TargetModel target = xy_mean_field(d, beta);
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd theta = 3.0 * rng.normal_vector(d);
    Eigen::VectorXd slow(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) acc += std::sin(theta[k] - theta[j]);
      slow[k] = -(beta / double(d)) * acc;
    }
    CHECK((target.grad_log_density(theta) - slow).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("xy model: density invariant under shifts along ones and permutations") {
  const Eigen::Index d = 8;
  const TargetModel target = xy_mean_field(d, 1.5);
  Rng rng(5);
  const Eigen::VectorXd theta = rng.normal_vector(d);
  const double base = target.log_density(theta);
  for (int trial = 0; trial < 5; ++trial) {
    const double shift = rng.normal();
    CHECK(target.log_density(theta.array() + shift) == doctest::Approx(base).epsilon(1e-10));
  }
  Eigen::VectorXd permuted = theta.reverse();
  CHECK(target.log_density(permuted) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("xy model gradient vs finite differences") {
  const TargetModel target = xy_mean_field(15, 3.0);
  Rng rng(6);
  check_gradient(target, rng, 2.0, Eigen::VectorXd::Zero(15));
}

TEST_CASE("sample_exact reproduces mean and covariance") {
  const Eigen::Index d = 5;
  const TargetModel target = make_tailored_gaussian(d, 2, 41);
  Rng rng(7);
  const int n = 100000;
  const Eigen::MatrixXd cov =
      testutil::sample_covariance([&] { return sample_exact(target, rng); }, n, d);
  const auto& g = *target.gaussian;
  const Eigen::MatrixXd sigma =
      g.eigenvectors * g.eigenvalues.asDiagonal() * g.eigenvectors.transpose();
  CHECK((cov - sigma).cwiseAbs().maxCoeff() <= 0.05 * g.eigenvalues[0]);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Rng rng2(8);
  for (int i = 0; i < n; ++i) mean += sample_exact(target, rng2);
  mean /= double(n);
  // Standard error of each mean coordinate is sqrt(sigma_ii / n).
  for (Eigen::Index i = 0; i < d; ++i) {
    const double se = std::sqrt(sigma(i, i) / double(n));
    CHECK(std::abs(mean[i] - g.mean[i]) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("sample_exact is deterministic under a fixed stream and rejects missing metadata") {
  const TargetModel target = make_tailored_gaussian(6, 1, 9);
  Rng a(55), b(55);
  CHECK((sample_exact(target, a) - sample_exact(target, b)).cwiseAbs().maxCoeff() == 0.0);

  const TargetModel xy = xy_mean_field(4, 1.0);
  Rng c(1);
  CHECK_THROWS_AS(sample_exact(xy, c), std::invalid_argument);
}

TEST_CASE("target constructors reject invalid arguments") {
  CHECK_THROWS(make_tailored_gaussian(10, 10, 1));
  CHECK_THROWS(make_tailored_gaussian(10, 0, 1));
  CHECK_THROWS(make_diag_lowrank_gaussian(10, 10, 1));
  CHECK_THROWS(make_logistic_regression(3, 1));
  CHECK_THROWS(xy_mean_field(1, 1.0));
  CHECK_THROWS(xy_mean_field(5, -1.0));
}
