#include "eigmala/linalg.hpp"

#include "eigmala/errors.hpp"
#include "eigmala/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <vector>

namespace eigmala {

namespace {

// One modified Gram-Schmidt sweep of column j against columns [0, j).
void mgs_sweep(Eigen::MatrixXd& v, Eigen::Index j) {
  for (Eigen::Index i = 0; i < j; ++i) {
    v.col(j) -= v.col(i).dot(v.col(j)) * v.col(i);
  }
}

}  // namespace

Eigen::MatrixXd gram_schmidt_project(const Eigen::MatrixXd& raw) {
  const Eigen::Index d = raw.rows();
  const Eigen::Index m = raw.cols();
  if (m > d) throw DimensionMismatchError("gram_schmidt_project: more columns than rows");
  Eigen::MatrixXd v = raw;
  for (Eigen::Index j = 0; j < m; ++j) {
    mgs_sweep(v, j);
    mgs_sweep(v, j);  // re-orthogonalisation pass
    const double norm = v.col(j).norm();
    if (norm < 1e-12) {
      throw RankDeficiencyError("gram_schmidt_project: rank-deficient input at column " +
                                std::to_string(j));
    }
    v.col(j) /= norm;
  }
  return v;
}

Eigen::MatrixXd complete_orthonormal_basis(const Eigen::MatrixXd& leading,
                                           std::uint64_t seed) {
  const Eigen::Index d = leading.rows();
  const Eigen::Index k = leading.cols();
  const Eigen::MatrixXd gram = leading.transpose() * leading;
  if ((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-8) {
    throw NotOrthonormalError("complete_orthonormal_basis: leading block not orthonormal");
  }
  Eigen::MatrixXd q(d, d);
  q.leftCols(k) = leading;
  Rng rng(seed);
  for (Eigen::Index j = k; j < d; ++j) {
    bool placed = false;
    for (int attempt = 0; attempt < 3 && !placed; ++attempt) {
      Eigen::VectorXd col = rng.normal_vector(d);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i < j; ++i) col -= q.col(i).dot(col) * q.col(i);
      }
      const double norm = col.norm();
      if (norm >= 1e-12) {
        q.col(j) = col / norm;
        placed = true;
      }
    }
    if (!placed) {
      throw RankDeficiencyError("complete_orthonormal_basis: fill column " +
                                std::to_string(j) + " degenerate after 3 attempts");
    }
  }
  return q;
}

SymEig sym_eig(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw DimensionMismatchError("sym_eig: matrix must be square");
  }
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NotSymmetricError("sym_eig: input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw SingularityError("sym_eig: eigendecomposition failed to converge");
  }
  const Eigen::Index d = matrix.rows();
  SymEig out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values[i] = solver.eigenvalues()[d - 1 - i];
    out.vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return out;
}

}  // namespace eigmala
