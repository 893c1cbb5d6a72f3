// Online learning of the preconditioner parameters: running mean, projected
// stochastic ascent for the leading eigenvector block, marginal variances
// along the rotated axes, and the global proposal scale. The same machinery
// drives the competing diagonal and dense covariance schemes.
#pragma once

#include "eigmala/householder.hpp"
#include "eigmala/linalg.hpp"
#include "eigmala/preconditioner.hpp"

#include <Eigen/Core>

#include <span>
#include <string>

namespace eigmala {

enum class Scheme { none, diagonal, dense, eigen, eigen_identity, diagonal_plus_lr };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct AdaptConfig {
  Scheme scheme = Scheme::eigen;
  int m = 3;                   // eigenvector count
  double alpha_pca = 0.1;      // exponent of the eigenvector learning rate
  double c_pca = 1.0;          // coefficient of the eigenvector learning rate
  double alpha_general = 0.7;  // exponent of every other learning rate
  double alpha_star = 0.574;   // target acceptance rate
  double sigma0 = 1.0;         // initial global scale
};

// gamma_t = t^{-alpha}; rejects t < 1.
double learning_rate(long t, double alpha);

// mu + gamma (x - mu).
Eigen::VectorXd update_mean(const Eigen::VectorXd& mu, const Eigen::VectorXd& x,
                            double gamma);

// V + gamma_eff x_c (x_c^T V) followed by the Gram-Schmidt projection; the
// inner product is taken first so the update is O(md). Throws
// RankDeficiencyError if the projection collapses.
Eigen::MatrixXd oja_update(const Eigen::MatrixXd& v, const Eigen::VectorXd& x_centered,
                           double gamma_eff);

// log sigma + gamma (alpha_t - alpha_star).
double update_scale(double log_sigma, double alpha_t, double alpha_star, double gamma);

// Marginal scale update along the rotated axes: with x~ = Q^T x and
// mu~ = Q^T mu, D'^2 = D^2 + gamma ((x~ - mu~)^2 - D^2); if identity_tail,
// entries m+1..d are reset to 1.
Eigen::VectorXd update_eigvals(const Eigen::VectorXd& d_scales, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& mu, const HouseholderChain& chain,
                               double gamma, bool identity_tail, int m);

// Elementwise variant of the diagonal scheme: L'^2 = L^2 + gamma ((x-mu)^2 - L^2).
Eigen::VectorXd adapt_step_diagonal(const Eigen::VectorXd& l_diag, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& mu, double gamma);

// Dense covariance scheme: A = LL^T + gamma ((x-mu)(x-mu)^T - LL^T),
// symmetrised, eigenvalues clamped at 1e-10 of the largest, and L' set to
// the symmetric square root. O(d^3) per update.
Eigen::MatrixXd adapt_step_dense(const Eigen::MatrixXd& l, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& mu, double gamma);

// Pre-learning-rate update terms for one chain at one iteration. Fields are
// filled per phase; empty members are ignored by averaging.
struct AdaptIncrement {
  Eigen::VectorXd mean_incr;   // x - mu_{t-1}
  Eigen::MatrixXd oja_incr;    // (x - mu_t)(x - mu_t)^T V, d x m
  double scale_incr = 0.0;     // alpha_t - alpha_star
  Eigen::VectorXd diag_incr;   // squared rotated deviations (x~ - mu~)^2
  Eigen::MatrixXd dense_incr;  // (x - mu_t)(x - mu_t)^T, dense scheme only
};

// Field-wise arithmetic mean; the averaged increment is applied once with
// the shared learning rate.
AdaptIncrement average_increments(std::span<const AdaptIncrement> incrs);

// Adaptive parameters of the eigen schemes as one bundle.
struct EigenSchemeParams {
  EigenBasis basis;        // directions V, scales D, mean mu
  HouseholderChain chain;  // Q(V), rebuilt whenever V changes
  double log_sigma = 0.0;
};

// One complete adaptive step (single chain): learning rate, mean, Oja +
// projection, global scale, chain rebuild, diagonal update (with the unit
// tail when the scheme is eigen_identity).
EigenSchemeParams adapt_step_eigen(const EigenSchemeParams& params, const Eigen::VectorXd& x,
                                   double alpha_t, long t, const AdaptConfig& config);

// Orchestrates per-step adaptation for k lock-stepped chains: increments are
// computed per chain, averaged, and applied once. Scheme-aware; for the
// pre-chain diag+low-rank preconditioner only the global scale adapts.
class Adapter {
 public:
  Adapter(const AdaptConfig& config, Eigen::Index dim,
          std::span<const Eigen::VectorXd> init_positions);
  // For diagonal_plus_lr: the learned preconditioner stays frozen.
  Adapter(const AdaptConfig& config, Eigen::Index dim,
          std::span<const Eigen::VectorXd> init_positions, Preconditioner frozen);

  // One adaptive step from the chains' latest states and acceptance
  // probabilities (rejected moves feed their repeated state).
  void observe(std::span<const Eigen::VectorXd> positions,
               std::span<const double> accept_probs);

  const Preconditioner& preconditioner() const { return precond_; }
  const Eigen::VectorXd& mean() const { return mu_; }
  const EigenBasis& basis() const { return basis_; }
  double log_sigma() const { return log_sigma_; }
  long iteration() const { return t_; }

 private:
  void rebuild_preconditioner();

  AdaptConfig cfg_;
  Eigen::Index dim_;
  long t_ = 0;
  Eigen::VectorXd mu_;
  EigenBasis basis_;        // eigen schemes
  HouseholderChain chain_;  // eigen schemes
  Eigen::VectorXd diag_l_;  // diagonal scheme
  Eigen::MatrixXd dense_l_; // dense scheme
  double log_sigma_ = 0.0;
  Preconditioner precond_;
};

}  // namespace eigmala
