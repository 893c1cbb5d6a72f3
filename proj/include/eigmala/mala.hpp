// Preconditioned Metropolis-adjusted Langevin kernel. The proposal is
//   Y = X + (sigma^2/2) LL^T grad log pi(X) + sigma L xi,
// and acceptance is computed wholly in log space through L^{-1} quadratic
// forms; the Gaussian normalising constants cancel, so no determinant is
// ever evaluated.
#pragma once

#include "eigmala/preconditioner.hpp"
#include "eigmala/rng.hpp"
#include "eigmala/targets.hpp"

#include <Eigen/Core>

namespace eigmala {

struct ChainState {
  Eigen::VectorXd position;
  Eigen::VectorXd grad;       // grad log pi at position
  double log_density = 0.0;   // log pi at position (up to constant)
  Rng rng;
  long iteration = 0;

  ChainState(const TargetModel& target, Eigen::VectorXd init, Rng stream);
};

struct StepOutcome {
  double accept_prob = 0.0;  // alpha_t in [0,1]
  bool accepted = false;
  Eigen::VectorXd proposal;
};

// Draws a proposal from the current state (consumes d normals from the
// chain's stream). The state itself is not advanced.
Eigen::VectorXd propose(ChainState& state, const Preconditioner& p, const TargetModel& target);

// log pi(y) - log pi(x) + log q(x|y) - log q(y|x) with
// log q(b|a) = -||L^{-1}(b - a - (sigma^2/2) LL^T grad log pi(a))||^2 / (2 sigma^2).
// Returns -inf when the proposal's log-density or gradient is non-finite.
double log_accept_ratio(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const TargetModel& target, const Preconditioner& p);

// One kernel transition: propose, accept with probability min{1, exp(ratio)},
// refresh caches on accept. Consumes d normals plus one uniform.
StepOutcome step(ChainState& state, const Preconditioner& p, const TargetModel& target);

}  // namespace eigmala
