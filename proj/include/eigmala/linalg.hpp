// Dense spectral utilities and the Stiefel projection used by the adaptive
// eigenvector step.
#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace eigmala {

// Projection onto the set of column-orthonormal d x m matrices by modified
// Gram-Schmidt with one re-orthogonalisation pass. Preserves the column span
// and the direction of the first column (up to positive scaling). Throws
// RankDeficiencyError if a residual column norm falls below 1e-12.
Eigen::MatrixXd gram_schmidt_project(const Eigen::MatrixXd& raw);

// Deterministic completion of a column-orthonormal d x K block to a full
// orthogonal d x d matrix; the first K columns are copied bitwise and the
// fill columns are Gram-Schmidt'ed seeded standard normals.
Eigen::MatrixXd complete_orthonormal_basis(const Eigen::MatrixXd& leading,
                                           std::uint64_t seed);

struct SymEig {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns, orthonormal, matching order
};

// Full spectral decomposition of a symmetric matrix, eigenvalues sorted
// descending. Rejects inputs whose asymmetry exceeds 1e-10 (relative).
SymEig sym_eig(const Eigen::MatrixXd& matrix);

// Adaptive eigen-information bundle: direction estimates V (column-
// orthonormal), diagonal scale estimates, and the running mean.
struct EigenBasis {
  Eigen::MatrixXd directions;  // d x m
  Eigen::VectorXd scales;      // length d, positive
  Eigen::VectorXd mean;        // length d
};

}  // namespace eigmala
