#include "eigmala/mala.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace eigmala {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// -||L^{-1}(b - a - (sigma^2/2) M grad_a)||^2 / (2 sigma^2), the log proposal
// density up to the shared normalising constant.
double log_proposal(const Eigen::VectorXd& a, const Eigen::VectorXd& grad_a,
                    const Eigen::VectorXd& b, const Preconditioner& p) {
  const double sigma = p.global_scale();
  const Eigen::VectorXd drift = a + 0.5 * sigma * sigma * p.apply_M(grad_a);
  const Eigen::VectorXd z = p.apply_L_inv(b - drift);
  return -z.squaredNorm() / (2.0 * sigma * sigma);
}

double ratio_from_cached(const Eigen::VectorXd& x, const Eigen::VectorXd& grad_x,
                         double logdens_x, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& grad_y, double logdens_y,
                         const Preconditioner& p) {
  if (!std::isfinite(logdens_y) || !grad_y.allFinite()) return kNegInf;
  return logdens_y - logdens_x + log_proposal(y, grad_y, x, p) -
         log_proposal(x, grad_x, y, p);
}

}  // namespace

ChainState::ChainState(const TargetModel& target, Eigen::VectorXd init, Rng stream)
    : position(std::move(init)), rng(std::move(stream)) {
  grad = target.grad_log_density(position);
  log_density = target.log_density(position);
}

Eigen::VectorXd propose(ChainState& state, const Preconditioner& p,
                        const TargetModel& target) {
  (void)target;
  const double sigma = p.global_scale();
  const Eigen::VectorXd xi = state.rng.normal_vector(state.position.size());
  return state.position + 0.5 * sigma * sigma * p.apply_M(state.grad) +
         sigma * p.apply_L(xi);
}

double log_accept_ratio(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const TargetModel& target, const Preconditioner& p) {
  const double logdens_y = target.log_density(y);
  if (!std::isfinite(logdens_y)) return kNegInf;
  return ratio_from_cached(x, target.grad_log_density(x), target.log_density(x), y,
                           target.grad_log_density(y), logdens_y, p);
}

StepOutcome step(ChainState& state, const Preconditioner& p, const TargetModel& target) {
  StepOutcome out;
  out.proposal = propose(state, p, target);

  const double logdens_y = target.log_density(out.proposal);
  double ratio = kNegInf;
  Eigen::VectorXd grad_y;
  if (std::isfinite(logdens_y)) {
    grad_y = target.grad_log_density(out.proposal);
    ratio = ratio_from_cached(state.position, state.grad, state.log_density,
                              out.proposal, grad_y, logdens_y, p);
  }

  out.accept_prob = std::isfinite(ratio) ? std::min(1.0, std::exp(ratio)) : 0.0;
  // One uniform per step regardless of the outcome keeps the stream layout
  // fixed: accept iff log u < ratio.
  const double u = state.rng.uniform();
  out.accepted = std::log(u) < ratio;
  if (out.accepted) {
    state.position = out.proposal;
    state.grad = std::move(grad_y);
    state.log_density = logdens_y;
  }
  ++state.iteration;
  return out;
}

}  // namespace eigmala
