#include "eigmala/preconditioner.hpp"

#include "eigmala/errors.hpp"
#include "eigmala/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>

namespace eigmala {

namespace {

void check_positive(const Eigen::VectorXd& v, const char* what) {
  if (v.size() > 0 && v.minCoeff() <= 0.0) {
    throw SingularityError(std::string(what) + ": scales must be strictly positive");
  }
}

void check_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionMismatchError(std::string(what) + ": dimension mismatch");
  }
}

// SMW solve of (diag + V V^T) y = x using the m x m capacitance matrix.
Eigen::VectorXd smw_solve(const Eigen::VectorXd& diag, const Eigen::MatrixXd& v,
                          const Eigen::LDLT<Eigen::MatrixXd>& capacitance,
                          const Eigen::VectorXd& x) {
  const Eigen::VectorXd dinv_x = x.cwiseQuotient(diag);
  if (v.cols() == 0) return dinv_x;
  const Eigen::VectorXd t = capacitance.solve(v.transpose() * dinv_x);
  return dinv_x - (v * t).cwiseQuotient(diag);
}

}  // namespace

// Solver for the dense variant: spectral pseudo-inverse when the factor is
// symmetric (the adaptive dense scheme always produces one), LU otherwise.
struct Preconditioner::DenseSolver {
  bool symmetric = false;
  SymEig eig;                               // of the factor itself
  Eigen::VectorXd floored_inverse_values;   // 1 / max(lambda, floor)
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // non-symmetric fallback

  explicit DenseSolver(const Eigen::MatrixXd& factor) {
    const double scale = std::max(1.0, factor.cwiseAbs().maxCoeff());
    symmetric = (factor - factor.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
    if (symmetric) {
      eig = sym_eig(factor);
      const double floor = 1e-12 * std::max(1.0, eig.values.cwiseAbs().maxCoeff());
      floored_inverse_values.resize(eig.values.size());
      for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        floored_inverse_values[i] = 1.0 / std::max(eig.values[i], floor);
      }
    } else {
      lu.compute(factor);
      const Eigen::VectorXd udiag = lu.matrixLU().diagonal().cwiseAbs();
      if (udiag.minCoeff() <= 1e-12) {
        throw SingularityError("dense preconditioner factor is numerically singular");
      }
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& x) const {
    if (symmetric) {
      return eig.vectors *
             (floored_inverse_values.cwiseProduct(eig.vectors.transpose() * x));
    }
    return lu.solve(x);
  }
};

Preconditioner::Preconditioner(Variant variant, double global_scale)
    : variant_(std::move(variant)), global_scale_(global_scale) {
  if (global_scale_ <= 0.0) throw SingularityError("global scale must be positive");
  if (const auto* d = std::get_if<DiagonalPrecond>(&variant_)) {
    check_positive(d->scales, "Diagonal");
  } else if (const auto* e = std::get_if<EigenChainPrecond>(&variant_)) {
    check_positive(e->scales, "EigenChain");
    check_dim(e->scales.size(), e->chain.dim, "EigenChain");
  } else if (const auto* lr = std::get_if<DiagLowRankPrecond>(&variant_)) {
    check_positive(lr->diag, "DiagLowRank");
    check_dim(lr->lowrank.rows(), lr->diag.size(), "DiagLowRank");
  } else if (const auto* f = std::get_if<DenseFactorPrecond>(&variant_)) {
    if (f->factor.rows() != f->factor.cols()) {
      throw DimensionMismatchError("DenseFactor: factor must be square");
    }
    dense_solver_ = std::make_shared<const DenseSolver>(f->factor);
  }
}

Preconditioner Preconditioner::identity(Eigen::Index dim, double sigma) {
  return Preconditioner(IdentityPrecond{dim}, sigma);
}
Preconditioner Preconditioner::diagonal(Eigen::VectorXd scales, double sigma) {
  return Preconditioner(DiagonalPrecond{std::move(scales)}, sigma);
}
Preconditioner Preconditioner::dense_factor(Eigen::MatrixXd factor, double sigma) {
  return Preconditioner(DenseFactorPrecond{std::move(factor)}, sigma);
}
Preconditioner Preconditioner::eigen_chain(HouseholderChain chain, Eigen::VectorXd scales,
                                           double sigma) {
  return Preconditioner(EigenChainPrecond{std::move(chain), std::move(scales)}, sigma);
}
Preconditioner Preconditioner::diag_low_rank(Eigen::VectorXd diag, Eigen::MatrixXd lowrank,
                                             double sigma) {
  return Preconditioner(DiagLowRankPrecond{std::move(diag), std::move(lowrank)}, sigma);
}

Eigen::VectorXd Preconditioner::apply_L(const Eigen::VectorXd& x) const {
  return std::visit(
      [&](const auto& p) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IdentityPrecond>) {
          return x;
        } else if constexpr (std::is_same_v<T, DiagonalPrecond>) {
          check_dim(x.size(), p.scales.size(), "apply_L");
          return p.scales.cwiseProduct(x);
        } else if constexpr (std::is_same_v<T, DenseFactorPrecond>) {
          check_dim(x.size(), p.factor.cols(), "apply_L");
          return p.factor * x;
        } else if constexpr (std::is_same_v<T, EigenChainPrecond>) {
          check_dim(x.size(), p.scales.size(), "apply_L");
          return chain_apply(p.chain, p.scales.cwiseProduct(x));
        } else {
          check_dim(x.size(), p.diag.size(), "apply_L");
          Eigen::VectorXd y = p.diag.cwiseProduct(x);
          if (p.lowrank.cols() > 0) y += p.lowrank * (p.lowrank.transpose() * x);
          return y;
        }
      },
      variant_);
}

Eigen::VectorXd Preconditioner::apply_Lt(const Eigen::VectorXd& x) const {
  return std::visit(
      [&](const auto& p) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DenseFactorPrecond>) {
          check_dim(x.size(), p.factor.rows(), "apply_Lt");
          return p.factor.transpose() * x;
        } else if constexpr (std::is_same_v<T, EigenChainPrecond>) {
          check_dim(x.size(), p.scales.size(), "apply_Lt");
          return p.scales.cwiseProduct(chain_apply(p.chain, x, /*transpose=*/true));
        } else {
          // Identity, Diagonal, and DiagLowRank are symmetric.
          return apply_L(x);
        }
      },
      variant_);
}

Eigen::VectorXd Preconditioner::apply_L_inv(const Eigen::VectorXd& x) const {
  return std::visit(
      [&](const auto& p) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IdentityPrecond>) {
          return x;
        } else if constexpr (std::is_same_v<T, DiagonalPrecond>) {
          check_dim(x.size(), p.scales.size(), "apply_L_inv");
          if (p.scales.minCoeff() < 1e-12) {
            throw SingularityError("apply_L_inv: diagonal scale below 1e-12");
          }
          return x.cwiseQuotient(p.scales);
        } else if constexpr (std::is_same_v<T, DenseFactorPrecond>) {
          check_dim(x.size(), p.factor.rows(), "apply_L_inv");
          return dense_solver_->solve(x);
        } else if constexpr (std::is_same_v<T, EigenChainPrecond>) {
          check_dim(x.size(), p.scales.size(), "apply_L_inv");
          if (p.scales.minCoeff() < 1e-12) {
            throw SingularityError("apply_L_inv: chain scale below 1e-12");
          }
          // L^{-1} = D^{-1} Q^T.
          return chain_apply(p.chain, x, /*transpose=*/true).cwiseQuotient(p.scales);
        } else {
          check_dim(x.size(), p.diag.size(), "apply_L_inv");
          if (p.diag.minCoeff() < 1e-12) {
            throw SingularityError("apply_L_inv: diagonal part below 1e-12");
          }
          const Eigen::Index m = p.lowrank.cols();
          Eigen::MatrixXd cap = Eigen::MatrixXd::Identity(m, m);
          if (m > 0) {
            cap += p.lowrank.transpose() *
                   p.diag.cwiseInverse().asDiagonal() * p.lowrank;
          }
          Eigen::LDLT<Eigen::MatrixXd> ldlt(cap);
          if (ldlt.info() != Eigen::Success) {
            throw SingularityError("apply_L_inv: SMW capacitance solve failed");
          }
          return smw_solve(p.diag, p.lowrank, ldlt, x);
        }
      },
      variant_);
}

Eigen::VectorXd Preconditioner::apply_M(const Eigen::VectorXd& x) const {
  return apply_L(apply_Lt(x));
}

Eigen::VectorXd Preconditioner::sample_gaussian(Rng& rng) const {
  const Eigen::Index d = std::visit(
      [](const auto& p) -> Eigen::Index {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IdentityPrecond>) {
          return p.dim;
        } else if constexpr (std::is_same_v<T, DiagonalPrecond>) {
          return p.scales.size();
        } else if constexpr (std::is_same_v<T, DenseFactorPrecond>) {
          return p.factor.rows();
        } else if constexpr (std::is_same_v<T, EigenChainPrecond>) {
          return p.scales.size();
        } else {
          return p.diag.size();
        }
      },
      variant_);
  return apply_L(rng.normal_vector(d));
}

Eigen::MatrixXd Preconditioner::dense_L(Eigen::Index dim) const {
  Eigen::MatrixXd l(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    l.col(j) = apply_L(Eigen::VectorXd::Unit(dim, j));
  }
  return l;
}

}  // namespace eigmala
