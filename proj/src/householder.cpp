#include "eigmala/householder.hpp"

#include "eigmala/errors.hpp"

#include <cmath>

namespace eigmala {

Eigen::VectorXd householder_apply(const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                                  const Eigen::VectorXd& x) {
  if (v.size() != w.size() || v.size() != x.size()) {
    throw DimensionMismatchError("householder_apply: v, w, x must share a dimension");
  }
  const Eigen::VectorXd u = v - w;
  const double norm2 = u.squaredNorm();
  const double gap = degenerate_gap(v, w);
  if (std::sqrt(norm2) <= gap) {
    throw DegenerateReflectorError("householder_apply: v and w coincide");
  }
  return x - (2.0 * u.dot(x) / norm2) * u;
}

namespace {

// Applies the first `upto` factors of the chain to x.
Eigen::VectorXd apply_prefix(const HouseholderChain& chain, Eigen::VectorXd x,
                             Eigen::Index upto) {
  for (Eigen::Index k = 0; k < upto; ++k) {
    const Eigen::VectorXd& u = chain.reflectors[static_cast<std::size_t>(k)];
    if (u.size() == 0) continue;
    x -= (2.0 * u.dot(x)) * u;
  }
  return x;
}

}  // namespace

HouseholderChain build_orthogonal_factor(const Eigen::MatrixXd& basis) {
  const Eigen::Index d = basis.rows();
  const Eigen::Index m = basis.cols();
  if (m > d) throw DimensionMismatchError("build_orthogonal_factor: more columns than rows");
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  if ((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-8) {
    throw NotOrthonormalError("build_orthogonal_factor: basis is not column-orthonormal");
  }

  HouseholderChain chain;
  chain.dim = d;
  chain.reflectors.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    // Current image of e_k under the partial chain Q_{k-1}.
    Eigen::VectorXd qek = apply_prefix(chain, Eigen::VectorXd::Unit(d, k), k);
    Eigen::VectorXd u = qek - basis.col(k);
    const double norm = u.norm();
    if (norm <= degenerate_gap(qek, basis.col(k))) {
      chain.reflectors.emplace_back();  // identity factor
    } else {
      chain.reflectors.push_back(u / norm);
    }
  }
  return chain;
}

Eigen::VectorXd chain_apply(const HouseholderChain& chain, const Eigen::VectorXd& x,
                            bool transpose) {
  if (x.size() != chain.dim) {
    throw DimensionMismatchError("chain_apply: vector dimension does not match chain");
  }
  Eigen::VectorXd y = x;
  const Eigen::Index m = chain.count();
  if (!transpose) {
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::VectorXd& u = chain.reflectors[static_cast<std::size_t>(k)];
      if (u.size() == 0) continue;
      y -= (2.0 * u.dot(y)) * u;
    }
  } else {
    for (Eigen::Index k = m - 1; k >= 0; --k) {
      const Eigen::VectorXd& u = chain.reflectors[static_cast<std::size_t>(k)];
      if (u.size() == 0) continue;
      y -= (2.0 * u.dot(y)) * u;
    }
  }
  return y;
}

Eigen::MatrixXd chain_dense(const HouseholderChain& chain) {
  const Eigen::Index d = chain.dim;
  Eigen::MatrixXd q(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    q.col(j) = chain_apply(chain, Eigen::VectorXd::Unit(d, j));
  }
  return q;
}

}  // namespace eigmala
