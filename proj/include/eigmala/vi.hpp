// Pre-chain stochastic gradient descent on the reverse KL between
// N(mu, (D + VV^T)^2) and the target, producing a frozen diag+low-rank
// preconditioner. All linear algebra stays factored through
// Sherman-Morrison-Woodbury so no d x d matrix is materialised.
#pragma once

#include "eigmala/preconditioner.hpp"
#include "eigmala/rng.hpp"
#include "eigmala/targets.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace eigmala {

struct VIState {
  Eigen::VectorXd mu;
  Eigen::VectorXd delta;  // positive; D = delta^2
  Eigen::MatrixXd v;      // d x m
  long iteration = 0;
};

struct VIConfig {
  double lr_mu = 1e-3;
  double lr_delta = 1e-3;
  double lr_v = 1e-3;
  int batch = 10;
  long iterations = 5000;
  int rank = 3;  // columns of the low-rank component
};

// Default initialisation: Delta = 1 (so D = I) and V = 0.1 * ones.
VIState make_vi_state(Eigen::Index d, int m, Eigen::VectorXd mu0);

// Factored inverse of L = D + V V^T via the m x m capacitance matrix.
class SmwInverse {
 public:
  SmwInverse(const Eigen::VectorXd& diag, const Eigen::MatrixXd& v);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd inverse_diagonal() const;  // diag(L^{-1}), O(d m^2)
  double log_det() const;                    // log det L by the determinant lemma

 private:
  Eigen::VectorXd diag_;
  Eigen::MatrixXd v_;
  Eigen::MatrixXd w_;  // D^{-1} V
  Eigen::LDLT<Eigen::MatrixXd> capacitance_;
};

// The L gradient of the reverse KL objective in factored form:
//   grad_L = -L^{-1} - (1/B) sum_b grad log pi(x_b) xi_b^T,
// with xi_b = L^{-1}(x_b - mu) the standardised batch points.
class LowRankGradient {
 public:
  LowRankGradient(SmwInverse inverse, Eigen::MatrixXd grads, Eigen::MatrixXd xi);

  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& w) const;            // grad_L * w
  Eigen::MatrixXd apply_transpose(const Eigen::MatrixXd& w) const;  // grad_L^T * w
  Eigen::MatrixXd dense() const;  // materialised, for oracles only

  const SmwInverse& inverse() const { return inverse_; }

 private:
  SmwInverse inverse_;
  Eigen::MatrixXd grads_;  // d x B
  Eigen::MatrixXd xi_;     // d x B
};

// Builds the factored gradient from a sampled batch (columns of `batch`) and
// the matching log-density gradients.
LowRankGradient vi_grad_L(const VIState& state, const Eigen::MatrixXd& batch,
                          const Eigen::MatrixXd& batch_grads);

// One full optimisation iteration: sample a batch of size config.batch,
// evaluate gradients, and take the mean / Delta / V descent steps. Delta
// entries crossing zero are clamped at 1e-8 with a warning on stderr.
VIState vi_descend(const VIState& state, const TargetModel& target, const VIConfig& config,
                   Rng& rng);

// Runs config.iterations descent steps.
VIState run_vi(const TargetModel& target, const VIConfig& config, Rng& rng,
               Eigen::VectorXd mu0);

// Monte Carlo estimate of E_q[log q - log pi] over a fresh batch; the
// unnormalised target shifts it by a constant, so only differences matter.
double reverse_kl_surrogate(const VIState& state, const TargetModel& target, Rng& rng,
                            int batch);

// Freezes the learned parameters into a DiagLowRank preconditioner.
Preconditioner vi_to_preconditioner(const VIState& state, double sigma = 1.0);

}  // namespace eigmala
