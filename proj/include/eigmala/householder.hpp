// Chains of Householder reflections parameterising the orthogonal factor of
// the preconditioner: Q_1 = H(e_1 <-> v_1), Q_k = H(Q_{k-1}e_k <-> v_k)Q_{k-1}.
// Column i of the resulting Q equals v_i, and applying the chain costs O(md).
#pragma once

#include <Eigen/Core>

#include <vector>

namespace eigmala {

// m reflectors over R^d, applied left-to-right for Q and right-to-left for
// Q^T. An empty reflector vector marks an identity factor (the degenerate
// case where the target column already matched).
struct HouseholderChain {
  std::vector<Eigen::VectorXd> reflectors;  // unit vectors; empty = identity
  Eigen::Index dim = 0;

  Eigen::Index count() const { return static_cast<Eigen::Index>(reflectors.size()); }
};

// Relative gap below which a reflector pair (v, w) counts as degenerate.
inline double degenerate_gap(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  return 1e-12 * std::max({v.norm(), w.norm(), 1.0});
}

// H(v<->w) x = x - 2 (v-w)^T x / ||v-w||^2 (v-w). Throws
// DegenerateReflectorError when ||v-w|| is below the relative gap.
Eigen::VectorXd householder_apply(const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                                  const Eigen::VectorXd& x);

// Builds the reflector chain whose materialised matrix has basis.col(i) as
// its i-th column. `basis` must be column-orthonormal (checked to 1e-8).
// Construction is O(m^2 d); applications of the result are O(md).
HouseholderChain build_orthogonal_factor(const Eigen::MatrixXd& basis);

// Q x (reflectors in order) or Q^T x (reverse order; reflectors are
// symmetric). Identity markers are skipped.
Eigen::VectorXd chain_apply(const HouseholderChain& chain, const Eigen::VectorXd& x,
                            bool transpose = false);

// Materialises the d x d matrix Q. For diagnostics and tests only.
Eigen::MatrixXd chain_dense(const HouseholderChain& chain);

}  // namespace eigmala
