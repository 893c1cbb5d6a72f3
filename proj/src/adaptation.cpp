#include "eigmala/adaptation.hpp"

#include "eigmala/errors.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace eigmala {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::none: return "none";
    case Scheme::diagonal: return "diagonal";
    case Scheme::dense: return "dense";
    case Scheme::eigen: return "eigen";
    case Scheme::eigen_identity: return "eigen_identity";
    case Scheme::diagonal_plus_lr: return "diagonal_plus_LR";
  }
  return "unknown";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "none") return Scheme::none;
  if (name == "diagonal") return Scheme::diagonal;
  if (name == "dense") return Scheme::dense;
  if (name == "eigen") return Scheme::eigen;
  if (name == "eigen_identity") return Scheme::eigen_identity;
  if (name == "diagonal_plus_LR") return Scheme::diagonal_plus_lr;
  throw ConfigError("unknown scheme '" + name + "'");
}

double learning_rate(long t, double alpha) {
  if (t < 1) throw std::invalid_argument("learning_rate: t must be >= 1");
  return std::pow(static_cast<double>(t), -alpha);
}

Eigen::VectorXd update_mean(const Eigen::VectorXd& mu, const Eigen::VectorXd& x,
                            double gamma) {
  if (mu.size() != x.size()) throw DimensionMismatchError("update_mean: size mismatch");
  return mu + gamma * (x - mu);
}

Eigen::MatrixXd oja_update(const Eigen::MatrixXd& v, const Eigen::VectorXd& x_centered,
                           double gamma_eff) {
  if (v.rows() != x_centered.size()) {
    throw DimensionMismatchError("oja_update: size mismatch");
  }
  const Eigen::RowVectorXd w = x_centered.transpose() * v;  // O(md)
  return gram_schmidt_project(v + gamma_eff * x_centered * w);
}

double update_scale(double log_sigma, double alpha_t, double alpha_star, double gamma) {
  return log_sigma + gamma * (alpha_t - alpha_star);
}

Eigen::VectorXd update_eigvals(const Eigen::VectorXd& d_scales, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& mu, const HouseholderChain& chain,
                               double gamma, bool identity_tail, int m) {
  const Eigen::VectorXd x_rot = chain_apply(chain, x, /*transpose=*/true);
  const Eigen::VectorXd mu_rot = chain_apply(chain, mu, /*transpose=*/true);
  const Eigen::VectorXd dev2 = (x_rot - mu_rot).cwiseAbs2();
  Eigen::VectorXd d2 = d_scales.cwiseAbs2() + gamma * (dev2 - d_scales.cwiseAbs2());
  assert(d2.minCoeff() >= 0.0 && "eigenvalue recursion produced a negative square");
  Eigen::VectorXd out = d2.cwiseSqrt();
  if (identity_tail) {
    for (Eigen::Index i = m; i < out.size(); ++i) out[i] = 1.0;
  }
  return out;
}

Eigen::VectorXd adapt_step_diagonal(const Eigen::VectorXd& l_diag, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& mu, double gamma) {
  const Eigen::VectorXd dev2 = (x - mu).cwiseAbs2();
  return (l_diag.cwiseAbs2() + gamma * (dev2 - l_diag.cwiseAbs2())).cwiseSqrt();
}

Eigen::MatrixXd adapt_step_dense(const Eigen::MatrixXd& l, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& mu, double gamma) {
  const Eigen::VectorXd dev = x - mu;
  Eigen::MatrixXd a = l * l.transpose();
  a += gamma * (dev * dev.transpose() - a);
  a = 0.5 * (a + a.transpose());
  const SymEig eig = sym_eig(a);
  const double lambda_max = eig.values.maxCoeff();
  if (lambda_max <= 0.0) {
    throw SingularityError("adapt_step_dense: covariance estimate collapsed to zero");
  }
  const double floor = 1e-10 * lambda_max;
  const Eigen::VectorXd clamped = eig.values.cwiseMax(floor);
  return eig.vectors * clamped.cwiseSqrt().asDiagonal() * eig.vectors.transpose();
}

AdaptIncrement average_increments(std::span<const AdaptIncrement> incrs) {
  if (incrs.empty()) throw std::invalid_argument("average_increments: empty sequence");
  AdaptIncrement avg = incrs[0];
  for (std::size_t i = 1; i < incrs.size(); ++i) {
    const AdaptIncrement& inc = incrs[i];
    if (inc.mean_incr.size() != avg.mean_incr.size() ||
        inc.diag_incr.size() != avg.diag_incr.size() ||
        inc.oja_incr.rows() != avg.oja_incr.rows() ||
        inc.oja_incr.cols() != avg.oja_incr.cols() ||
        inc.dense_incr.rows() != avg.dense_incr.rows()) {
      throw DimensionMismatchError("average_increments: increments disagree in shape");
    }
    if (avg.mean_incr.size() > 0) avg.mean_incr += inc.mean_incr;
    if (avg.oja_incr.size() > 0) avg.oja_incr += inc.oja_incr;
    if (avg.diag_incr.size() > 0) avg.diag_incr += inc.diag_incr;
    if (avg.dense_incr.size() > 0) avg.dense_incr += inc.dense_incr;
    avg.scale_incr += inc.scale_incr;
  }
  const double inv_k = 1.0 / static_cast<double>(incrs.size());
  if (avg.mean_incr.size() > 0) avg.mean_incr *= inv_k;
  if (avg.oja_incr.size() > 0) avg.oja_incr *= inv_k;
  if (avg.diag_incr.size() > 0) avg.diag_incr *= inv_k;
  if (avg.dense_incr.size() > 0) avg.dense_incr *= inv_k;
  avg.scale_incr *= inv_k;
  return avg;
}

EigenSchemeParams adapt_step_eigen(const EigenSchemeParams& params, const Eigen::VectorXd& x,
                                   double alpha_t, long t, const AdaptConfig& config) {
  EigenSchemeParams next = params;
  const double gamma = learning_rate(t, config.alpha_general);
  next.basis.mean = update_mean(params.basis.mean, x, gamma);

  const double gamma_pca = config.c_pca * learning_rate(t, config.alpha_pca);
  try {
    next.basis.directions =
        oja_update(params.basis.directions, x - next.basis.mean, gamma_pca);
    next.chain = build_orthogonal_factor(next.basis.directions);
  } catch (const RankDeficiencyError&) {
    // Collapsed projection: keep the previous directions for this iteration.
    next.basis.directions = params.basis.directions;
    next.chain = params.chain;
  }

  next.log_sigma = update_scale(params.log_sigma, alpha_t, config.alpha_star, gamma);
  next.basis.scales =
      update_eigvals(params.basis.scales, x, next.basis.mean, next.chain, gamma,
                     config.scheme == Scheme::eigen_identity, config.m);
  return next;
}

Adapter::Adapter(const AdaptConfig& config, Eigen::Index dim,
                 std::span<const Eigen::VectorXd> init_positions)
    : cfg_(config), dim_(dim) {
  if (init_positions.empty()) {
    throw std::invalid_argument("Adapter: need at least one initial position");
  }
  mu_ = Eigen::VectorXd::Zero(dim_);
  for (const auto& x : init_positions) mu_ += x;
  mu_ /= static_cast<double>(init_positions.size());
  log_sigma_ = std::log(cfg_.sigma0);

  if (cfg_.scheme == Scheme::eigen || cfg_.scheme == Scheme::eigen_identity) {
    if (cfg_.m < 1 || cfg_.m > dim_) throw ConfigError("Adapter: m must lie in [1, d]");
    basis_.directions = Eigen::MatrixXd::Identity(dim_, cfg_.m);
    basis_.scales = Eigen::VectorXd::Ones(dim_);
    basis_.mean = mu_;
    chain_ = build_orthogonal_factor(basis_.directions);
  } else if (cfg_.scheme == Scheme::diagonal) {
    diag_l_ = Eigen::VectorXd::Ones(dim_);
  } else if (cfg_.scheme == Scheme::dense) {
    dense_l_ = Eigen::MatrixXd::Identity(dim_, dim_);
  } else if (cfg_.scheme == Scheme::diagonal_plus_lr) {
    throw ConfigError("Adapter: diagonal_plus_LR needs a pre-learned preconditioner");
  }
  rebuild_preconditioner();
}

Adapter::Adapter(const AdaptConfig& config, Eigen::Index dim,
                 std::span<const Eigen::VectorXd> init_positions, Preconditioner frozen)
    : cfg_(config), dim_(dim), precond_(std::move(frozen)) {
  if (cfg_.scheme != Scheme::diagonal_plus_lr) {
    throw ConfigError("Adapter: frozen preconditioner is only for diagonal_plus_LR");
  }
  mu_ = Eigen::VectorXd::Zero(dim_);
  for (const auto& x : init_positions) mu_ += x;
  mu_ /= static_cast<double>(init_positions.size());
  log_sigma_ = std::log(cfg_.sigma0);
  precond_.set_global_scale(cfg_.sigma0);
}

void Adapter::rebuild_preconditioner() {
  const double sigma = std::exp(log_sigma_);
  switch (cfg_.scheme) {
    case Scheme::none:
      precond_ = Preconditioner::identity(dim_, sigma);
      break;
    case Scheme::diagonal:
      precond_ = Preconditioner::diagonal(diag_l_, sigma);
      break;
    case Scheme::dense:
      precond_ = Preconditioner::dense_factor(dense_l_, sigma);
      break;
    case Scheme::eigen:
    case Scheme::eigen_identity:
      precond_ = Preconditioner::eigen_chain(chain_, basis_.scales, sigma);
      break;
    case Scheme::diagonal_plus_lr:
      precond_.set_global_scale(sigma);
      break;
  }
}

void Adapter::observe(std::span<const Eigen::VectorXd> positions,
                      std::span<const double> accept_probs) {
  if (positions.size() != accept_probs.size() || positions.empty()) {
    throw DimensionMismatchError("Adapter::observe: positions/accept_probs mismatch");
  }
  const std::size_t k = positions.size();
  ++t_;
  const double gamma = learning_rate(t_, cfg_.alpha_general);

  std::vector<AdaptIncrement> incrs(k);
  for (std::size_t j = 0; j < k; ++j) incrs[j].scale_incr = accept_probs[j] - cfg_.alpha_star;

  const bool learns_mean = cfg_.scheme == Scheme::diagonal || cfg_.scheme == Scheme::dense ||
                           cfg_.scheme == Scheme::eigen ||
                           cfg_.scheme == Scheme::eigen_identity;
  if (learns_mean) {
    for (std::size_t j = 0; j < k; ++j) incrs[j].mean_incr = positions[j] - mu_;
    mu_ += gamma * average_increments(incrs).mean_incr;
  }

  switch (cfg_.scheme) {
    case Scheme::none:
    case Scheme::diagonal_plus_lr:
      break;
    case Scheme::diagonal: {
      for (std::size_t j = 0; j < k; ++j) {
        incrs[j].diag_incr = (positions[j] - mu_).cwiseAbs2();
      }
      const Eigen::VectorXd dev2 = average_increments(incrs).diag_incr;
      diag_l_ = (diag_l_.cwiseAbs2() + gamma * (dev2 - diag_l_.cwiseAbs2()))
                    .cwiseSqrt()
                    .cwiseMax(kScaleFloor);
      break;
    }
    case Scheme::dense: {
      for (std::size_t j = 0; j < k; ++j) {
        const Eigen::VectorXd dev = positions[j] - mu_;
        incrs[j].dense_incr = dev * dev.transpose();
      }
      const Eigen::MatrixXd outer = average_increments(incrs).dense_incr;
      Eigen::MatrixXd a = dense_l_ * dense_l_.transpose();
      a += gamma * (outer - a);
      a = 0.5 * (a + a.transpose());
      const SymEig eig = sym_eig(a);
      const double lambda_max = eig.values.maxCoeff();
      if (lambda_max <= 0.0) {
        throw SingularityError("dense adaptation: covariance estimate collapsed");
      }
      const Eigen::VectorXd clamped = eig.values.cwiseMax(1e-10 * lambda_max);
      dense_l_ = eig.vectors * clamped.cwiseSqrt().asDiagonal() * eig.vectors.transpose();
      break;
    }
    case Scheme::eigen:
    case Scheme::eigen_identity: {
      const double gamma_pca = cfg_.c_pca * learning_rate(t_, cfg_.alpha_pca);
      for (std::size_t j = 0; j < k; ++j) {
        const Eigen::VectorXd dev = positions[j] - mu_;
        incrs[j].oja_incr = dev * (dev.transpose() * basis_.directions);
      }
      const Eigen::MatrixXd oja = average_increments(incrs).oja_incr;
      try {
        basis_.directions = gram_schmidt_project(basis_.directions + gamma_pca * oja);
        chain_ = build_orthogonal_factor(basis_.directions);
      } catch (const RankDeficiencyError&) {
        // Skip the eigenvector update for this iteration.
      }
      const Eigen::VectorXd mu_rot = chain_apply(chain_, mu_, /*transpose=*/true);
      for (std::size_t j = 0; j < k; ++j) {
        const Eigen::VectorXd x_rot = chain_apply(chain_, positions[j], /*transpose=*/true);
        incrs[j].diag_incr = (x_rot - mu_rot).cwiseAbs2();
      }
      const Eigen::VectorXd dev2 = average_increments(incrs).diag_incr;
      basis_.scales =
          (basis_.scales.cwiseAbs2() + gamma * (dev2 - basis_.scales.cwiseAbs2()))
              .cwiseSqrt()
              .cwiseMax(kScaleFloor);
      if (cfg_.scheme == Scheme::eigen_identity) {
        for (Eigen::Index i = cfg_.m; i < dim_; ++i) basis_.scales[i] = 1.0;
      }
      basis_.mean = mu_;
      break;
    }
  }

  const double alpha_avg = average_increments(incrs).scale_incr + cfg_.alpha_star;
  log_sigma_ = update_scale(log_sigma_, alpha_avg, cfg_.alpha_star, gamma);
  rebuild_preconditioner();
}

}  // namespace eigmala
