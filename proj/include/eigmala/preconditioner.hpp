// Uniform interface over the five preconditioner parameterisations used by
// the samplers: x -> Lx, L^{-1}x, LL^T x, and N(0, LL^T) draws. The global
// proposal scale sigma is carried alongside L and applied only by the kernel.
#pragma once

#include "eigmala/householder.hpp"
#include "eigmala/rng.hpp"

#include <Eigen/Core>

#include <memory>
#include <variant>

namespace eigmala {

struct IdentityPrecond {
  Eigen::Index dim = 0;
};

struct DiagonalPrecond {
  Eigen::VectorXd scales;  // strictly positive
};

// General (not necessarily triangular) dense factor. The adaptive dense
// scheme produces symmetric square roots; those are inverted through their
// spectral decomposition with a small eigenvalue floor. Non-symmetric
// factors fall back to an LU solve.
struct DenseFactorPrecond {
  Eigen::MatrixXd factor;
};

// L = Q D with Q a Householder chain and D a positive diagonal.
struct EigenChainPrecond {
  HouseholderChain chain;
  Eigen::VectorXd scales;  // strictly positive, length d
};

// L = diag + lowrank lowrank^T (symmetric); inverses go through
// Sherman-Morrison-Woodbury so applications stay O(md).
struct DiagLowRankPrecond {
  Eigen::VectorXd diag;     // strictly positive
  Eigen::MatrixXd lowrank;  // d x m
};

class Preconditioner {
 public:
  using Variant = std::variant<IdentityPrecond, DiagonalPrecond, DenseFactorPrecond,
                               EigenChainPrecond, DiagLowRankPrecond>;

  Preconditioner() : Preconditioner(IdentityPrecond{0}, 1.0) {}
  Preconditioner(Variant variant, double global_scale);

  static Preconditioner identity(Eigen::Index dim, double sigma = 1.0);
  static Preconditioner diagonal(Eigen::VectorXd scales, double sigma = 1.0);
  static Preconditioner dense_factor(Eigen::MatrixXd factor, double sigma = 1.0);
  static Preconditioner eigen_chain(HouseholderChain chain, Eigen::VectorXd scales,
                                    double sigma = 1.0);
  static Preconditioner diag_low_rank(Eigen::VectorXd diag, Eigen::MatrixXd lowrank,
                                      double sigma = 1.0);

  Eigen::VectorXd apply_L(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_Lt(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_L_inv(const Eigen::VectorXd& x) const;
  // LL^T x, composed as apply_L(apply_Lt(x)).
  Eigen::VectorXd apply_M(const Eigen::VectorXd& x) const;
  // One draw from N(0, LL^T) (the global scale is not applied here).
  Eigen::VectorXd sample_gaussian(Rng& rng) const;

  // Materialised L for diagnostics and oracles; O(d * apply cost).
  Eigen::MatrixXd dense_L(Eigen::Index dim) const;

  double global_scale() const { return global_scale_; }
  void set_global_scale(double sigma) { global_scale_ = sigma; }
  const Variant& variant() const { return variant_; }

 private:
  struct DenseSolver;  // cached factorisation for the dense variant

  Variant variant_;
  double global_scale_ = 1.0;
  std::shared_ptr<const DenseSolver> dense_solver_;
};

}  // namespace eigmala
