#include "eigmala/vi.hpp"

#include "eigmala/errors.hpp"

#include <cmath>
#include <cstdio>

namespace eigmala {

VIState make_vi_state(Eigen::Index d, int m, Eigen::VectorXd mu0) {
  if (mu0.size() != d) throw DimensionMismatchError("make_vi_state: mu0 size mismatch");
  VIState state;
  state.mu = std::move(mu0);
  state.delta = Eigen::VectorXd::Ones(d);
  state.v = Eigen::MatrixXd::Constant(d, m, 0.1);
  return state;
}

SmwInverse::SmwInverse(const Eigen::VectorXd& diag, const Eigen::MatrixXd& v)
    : diag_(diag), v_(v) {
  if (diag_.minCoeff() <= 0.0) {
    throw SingularityError("SmwInverse: diagonal part must be strictly positive");
  }
  w_ = diag_.cwiseInverse().asDiagonal() * v_;
  const Eigen::Index m = v_.cols();
  Eigen::MatrixXd cap = Eigen::MatrixXd::Identity(m, m) + v_.transpose() * w_;
  capacitance_.compute(cap);
  if (capacitance_.info() != Eigen::Success) {
    throw SingularityError("SmwInverse: capacitance solve failed");
  }
}

Eigen::VectorXd SmwInverse::apply(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd dinv_x = x.cwiseQuotient(diag_);
  if (v_.cols() == 0) return dinv_x;
  return dinv_x - w_ * capacitance_.solve(v_.transpose() * dinv_x);
}

Eigen::MatrixXd SmwInverse::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd dinv_x = diag_.cwiseInverse().asDiagonal() * x;
  if (v_.cols() == 0) return dinv_x;
  return dinv_x - w_ * capacitance_.solve(v_.transpose() * dinv_x);
}

Eigen::VectorXd SmwInverse::inverse_diagonal() const {
  Eigen::VectorXd diag_inv = diag_.cwiseInverse();
  if (v_.cols() == 0) return diag_inv;
  const Eigen::MatrixXd t = capacitance_.solve(w_.transpose());  // m x d
  diag_inv -= (w_.array() * t.transpose().array()).rowwise().sum().matrix();
  return diag_inv;
}

double SmwInverse::log_det() const {
  // det(D + VV^T) = det(D) det(I + V^T D^{-1} V).
  double log_det = diag_.array().log().sum();
  log_det += capacitance_.vectorD().array().log().sum();
  return log_det;
}

LowRankGradient::LowRankGradient(SmwInverse inverse, Eigen::MatrixXd grads,
                                 Eigen::MatrixXd xi)
    : inverse_(std::move(inverse)), grads_(std::move(grads)), xi_(std::move(xi)) {
  if (grads_.rows() != xi_.rows() || grads_.cols() != xi_.cols()) {
    throw DimensionMismatchError("LowRankGradient: batch shapes disagree");
  }
}

Eigen::VectorXd LowRankGradient::diagonal() const {
  const double inv_b = 1.0 / static_cast<double>(grads_.cols());
  return -inverse_.inverse_diagonal() -
         inv_b * (grads_.array() * xi_.array()).rowwise().sum().matrix();
}

Eigen::MatrixXd LowRankGradient::apply(const Eigen::MatrixXd& w) const {
  const double inv_b = 1.0 / static_cast<double>(grads_.cols());
  return -inverse_.apply(w) - inv_b * grads_ * (xi_.transpose() * w);
}

Eigen::MatrixXd LowRankGradient::apply_transpose(const Eigen::MatrixXd& w) const {
  const double inv_b = 1.0 / static_cast<double>(grads_.cols());
  return -inverse_.apply(w) - inv_b * xi_ * (grads_.transpose() * w);
}

Eigen::MatrixXd LowRankGradient::dense() const {
  const Eigen::Index d = grads_.rows();
  return apply(Eigen::MatrixXd::Identity(d, d));
}

LowRankGradient vi_grad_L(const VIState& state, const Eigen::MatrixXd& batch,
                          const Eigen::MatrixXd& batch_grads) {
  SmwInverse inverse(state.delta.cwiseAbs2(), state.v);
  const Eigen::MatrixXd centred = batch.colwise() - state.mu;
  const Eigen::MatrixXd xi = inverse.apply(centred);
  return LowRankGradient(std::move(inverse), batch_grads, xi);
}

namespace {

// L x = D x + V (V^T x) with D = delta^2.
Eigen::VectorXd apply_factor(const VIState& state, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = state.delta.cwiseAbs2().cwiseProduct(x);
  if (state.v.cols() > 0) y += state.v * (state.v.transpose() * x);
  return y;
}

}  // namespace

VIState vi_descend(const VIState& state, const TargetModel& target, const VIConfig& config,
                   Rng& rng) {
  if (config.lr_mu < 0 || config.lr_delta < 0 || config.lr_v < 0) {
    throw std::invalid_argument("vi_descend: learning rates must be non-negative");
  }
  const Eigen::Index d = state.mu.size();
  const int b = config.batch;

  Eigen::MatrixXd batch(d, b);
  Eigen::MatrixXd grads(d, b);
  for (int j = 0; j < b; ++j) {
    batch.col(j) = state.mu + apply_factor(state, rng.normal_vector(d));
    grads.col(j) = target.grad_log_density(batch.col(j));
  }
  const LowRankGradient grad_l = vi_grad_L(state, batch, grads);

  VIState next = state;
  // Mean step: the reverse-KL gradient in mu is -E[grad log pi], so descent
  // moves along the batch-mean score.
  next.mu += config.lr_mu * grads.rowwise().mean();

  next.delta -= config.lr_delta * state.delta.cwiseProduct(grad_l.diagonal());
  for (Eigen::Index i = 0; i < d; ++i) {
    if (next.delta[i] < 1e-8) {
      std::fprintf(stderr, "vi_descend: delta[%ld] clamped at 1e-8 (iteration %ld)\n",
                   static_cast<long>(i), state.iteration + 1);
      next.delta[i] = 1e-8;
    }
  }

  next.v -= config.lr_v * (grad_l.apply(state.v) + grad_l.apply_transpose(state.v));
  next.iteration = state.iteration + 1;
  return next;
}

VIState run_vi(const TargetModel& target, const VIConfig& config, Rng& rng,
               Eigen::VectorXd mu0) {
  VIState state = make_vi_state(target.dim, config.rank, std::move(mu0));
  for (long n = 0; n < config.iterations; ++n) {
    state = vi_descend(state, target, config, rng);
  }
  return state;
}

double reverse_kl_surrogate(const VIState& state, const TargetModel& target, Rng& rng,
                            int batch) {
  const Eigen::Index d = state.mu.size();
  const SmwInverse inverse(state.delta.cwiseAbs2(), state.v);
  const double log_det = inverse.log_det();
  double acc = 0.0;
  for (int j = 0; j < batch; ++j) {
    const Eigen::VectorXd xi = rng.normal_vector(d);
    const Eigen::VectorXd x = state.mu + apply_factor(state, xi);
    const double log_q = -log_det - 0.5 * xi.squaredNorm();  // up to the shared constant
    acc += log_q - target.log_density(x);
  }
  return acc / static_cast<double>(batch);
}

Preconditioner vi_to_preconditioner(const VIState& state, double sigma) {
  return Preconditioner::diag_low_rank(state.delta.cwiseAbs2(), state.v, sigma);
}

}  // namespace eigmala
