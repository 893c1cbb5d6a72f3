// The four experiment target families: log-density up to a constant, its
// gradient, and exact structure metadata where the construction provides it.
#pragma once

#include "eigmala/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace eigmala {

// Exact covariance eigenstructure of a Gaussian target.
struct GaussianSpectrum {
  Eigen::VectorXd mean;
  Eigen::MatrixXd eigenvectors;  // d x d, columns
  Eigen::VectorXd eigenvalues;   // descending, positive
};

struct TargetModel {
  std::string name;
  Eigen::Index dim = 0;
  std::function<double(const Eigen::VectorXd&)> log_density;  // up to a constant
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_log_density;
  std::optional<GaussianSpectrum> gaussian;  // enables exact sampling
  std::optional<Eigen::VectorXd> mode;
  std::optional<double> condition_number;
};

struct LogisticRegressionData {
  Eigen::MatrixXd x;  // n x d design
  Eigen::VectorXd y;  // responses in {0,1}
  double lambda = 0.01;
};

// N((5,...,5), Sigma) with K eigenvalues ~ N(100, 0.01), the rest 0.1, and
// the all-ones direction as the leading eigenvector; condition number ~1000.
TargetModel make_tailored_gaussian(Eigen::Index d, int k, std::uint64_t seed);

// N(mu, D + V V^T) with mu ~ N(0, I), D ~ U[0,1] diagonal and V standard
// normal d x rank; the spectrum clusters `rank` large eigenvalues.
TargetModel make_diag_lowrank_gaussian(Eigen::Index d, int rank, std::uint64_t seed);

// Bayesian logistic regression posterior with synthetic data (n = d), design
// X = U D V^T with Haar-distributed factors, and a g-prior of strength
// lambda = 0.01. The mode is located by damped Newton and stored as metadata.
TargetModel make_logistic_regression(Eigen::Index d, std::uint64_t seed);
TargetModel logistic_target_from_data(LogisticRegressionData data);
LogisticRegressionData make_logistic_data(Eigen::Index d, std::uint64_t seed);

// Mean-field planar-spin system with unit couplings at inverse temperature
// beta: U(theta) = -(C^2 + S^2) / (2d) with C = sum cos, S = sum sin. The
// state lives on R^d with the periodic density; evaluation is O(d).
TargetModel xy_mean_field(Eigen::Index d, double beta);

// Exact draw mu + Q sqrt(Lambda) xi from the Gaussian metadata.
Eigen::VectorXd sample_exact(const TargetModel& target, Rng& rng);

}  // namespace eigmala
