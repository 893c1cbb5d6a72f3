// Run diagnostics: effective sample size, eigenvector-recovery distance, and
// condition numbers of preconditioned Gaussian targets.
#pragma once

#include "eigmala/preconditioner.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace eigmala {

struct EssReport {
  Eigen::VectorXd per_coordinate_ess;  // NaN for coordinates flagged stuck
  double median_ess = 0.0;
  long n_samples = 0;
  std::string estimator = "geyer-initial-positive";
  std::vector<Eigen::Index> stuck_coordinates;
  bool valid = true;  // false when more than 5% of coordinates were stuck
};

// ESS = n / (1 + 2 sum rho_k) with autocovariances from mean-centred
// products and the sum truncated by the initial-positive-sequence rule
// (stop before the first non-positive consecutive-pair sum). The result is
// clamped into (0, 1.5 n]. Throws StuckChainError on zero variance.
double ess(const Eigen::VectorXd& series);

// 1 - (v^T w)^2 / (||v||^2 ||w||^2); sign- and scale-invariant.
double sin_squared(const Eigen::VectorXd& v, const Eigen::VectorXd& w);

// Condition number of a Gaussian target with covariance sigma after
// preconditioning: extreme-eigenvalue ratio of L^T Sigma^{-1} L.
double condition_number_gaussian(const Eigen::MatrixXd& sigma, const Preconditioner& p);

// Per-coordinate ESS over the trailing `window` fraction of the output
// matrix (rows = iterations). Stuck coordinates are excluded from the median
// when they are at most 5% of the total; otherwise the report is invalid.
EssReport median_over_coordinates(const Eigen::MatrixXd& output, double window);

// The preconditioner's implied leading direction, used for recovery traces:
// the first learned eigenvector for the chain variant, the dominant axis for
// the diagonal one, and the top eigenvector of LL^T for dense forms.
Eigen::VectorXd leading_direction(const Preconditioner& p, Eigen::Index dim);

}  // namespace eigmala
