#include "eigmala/targets.hpp"

#include "eigmala/errors.hpp"
#include "eigmala/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace eigmala {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Gaussian target from an exact eigendecomposition of its covariance.
TargetModel gaussian_from_spectrum(std::string name, GaussianSpectrum spectrum) {
  auto spec = std::make_shared<const GaussianSpectrum>(std::move(spectrum));
  TargetModel target;
  target.name = std::move(name);
  target.dim = spec->mean.size();
  target.gaussian = *spec;
  target.mode = spec->mean;
  target.condition_number = spec->eigenvalues.maxCoeff() / spec->eigenvalues.minCoeff();
  target.log_density = [spec](const Eigen::VectorXd& x) {
    const Eigen::VectorXd y = spec->eigenvectors.transpose() * (x - spec->mean);
    return -0.5 * y.cwiseQuotient(spec->eigenvalues).dot(y);
  };
  target.grad_log_density = [spec](const Eigen::VectorXd& x) {
    const Eigen::VectorXd y = spec->eigenvectors.transpose() * (x - spec->mean);
    return Eigen::VectorXd(-spec->eigenvectors * y.cwiseQuotient(spec->eigenvalues));
  };
  return target;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the sign
// of R's diagonal folded into Q.
Eigen::MatrixXd haar_orthogonal(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) g.col(j) = rng.normal_vector(n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

TargetModel make_tailored_gaussian(Eigen::Index d, int k, std::uint64_t seed) {
  if (k < 1 || k >= d) throw std::invalid_argument("make_tailored_gaussian: need 1 <= K < d");
  Rng rng(derive_seed(seed, "tailored_gaussian/eigenvalues"));
  Eigen::VectorXd values(d);
  for (int i = 0; i < k; ++i) values[i] = 100.0 + 0.1 * rng.normal();  // N(100, 0.01)
  for (Eigen::Index i = k; i < d; ++i) values[i] = 0.1;
  std::sort(values.data(), values.data() + k, std::greater<double>());

  Eigen::MatrixXd leading = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(double(d)));
  const Eigen::MatrixXd q =
      complete_orthonormal_basis(leading, derive_seed(seed, "tailored_gaussian/basis"));

  GaussianSpectrum spectrum;
  spectrum.mean = Eigen::VectorXd::Constant(d, 5.0);
  spectrum.eigenvectors = q;
  spectrum.eigenvalues = values;
  return gaussian_from_spectrum("tailored_gaussian", std::move(spectrum));
}

TargetModel make_diag_lowrank_gaussian(Eigen::Index d, int rank, std::uint64_t seed) {
  if (rank < 1 || rank >= d) {
    throw std::invalid_argument("make_diag_lowrank_gaussian: need 1 <= rank < d");
  }
  Rng rng(derive_seed(seed, "diag_lowrank_gaussian"));
  Eigen::VectorXd mu = rng.normal_vector(d);
  Eigen::VectorXd diag(d);
  for (Eigen::Index i = 0; i < d; ++i) diag[i] = rng.uniform();
  Eigen::MatrixXd v(d, rank);
  for (int j = 0; j < rank; ++j) v.col(j) = rng.normal_vector(d);

  Eigen::MatrixXd cov = v * v.transpose();
  cov.diagonal() += diag;
  const SymEig eig = sym_eig(cov);

  GaussianSpectrum spectrum;
  spectrum.mean = std::move(mu);
  spectrum.eigenvectors = eig.vectors;
  spectrum.eigenvalues = eig.values;
  return gaussian_from_spectrum("diag_lowrank_gaussian", std::move(spectrum));
}

LogisticRegressionData make_logistic_data(Eigen::Index d, std::uint64_t seed) {
  if (d < 4) throw std::invalid_argument("make_logistic_data: need d >= 4");
  const Eigen::Index n = d;
  Rng rng_u(derive_seed(seed, "logistic/U"));
  Rng rng_v(derive_seed(seed, "logistic/V"));
  Rng rng_d(derive_seed(seed, "logistic/D"));
  Rng rng_y(derive_seed(seed, "logistic/Y"));

  const Eigen::MatrixXd u = haar_orthogonal(n, rng_u);
  const Eigen::MatrixXd v = haar_orthogonal(d, rng_v);
  Eigen::VectorXd singular = Eigen::VectorXd::Constant(d, std::sqrt(1000.0));
  for (int i = 0; i < 3; ++i) singular[i] = 1.0 + 1e-3 * rng_d.normal();  // N(1, 1e-6)

  LogisticRegressionData data;
  data.x = u * singular.asDiagonal() * v.transpose();
  data.lambda = 0.01;

  // Synthetic responses from a seeded coefficient vector scaled to keep the
  // logits order one.
  Eigen::VectorXd beta_true = rng_d.normal_vector(d) / std::sqrt(double(d));
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = logistic(data.x.row(i).dot(beta_true));
    data.y[i] = (rng_y.uniform() < p) ? 1.0 : 0.0;
  }
  return data;
}

TargetModel logistic_target_from_data(LogisticRegressionData data) {
  const Eigen::Index d = data.x.cols();
  const Eigen::Index n = data.x.rows();
  if (data.y.size() != n) throw DimensionMismatchError("logistic: X rows != Y length");
  if (data.lambda <= 0.0) throw std::invalid_argument("logistic: lambda must be positive");

  struct Shared {
    LogisticRegressionData data;
    Eigen::MatrixXd xtx;
  };
  auto shared = std::make_shared<Shared>();
  shared->xtx = data.x.transpose() * data.x;
  shared->data = std::move(data);

  auto potential = [shared, n](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = shared->data.x * beta;
    double u = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      u += (1.0 - shared->data.y[i]) * z[i] + softplus(-z[i]);
    }
    u += 0.5 * shared->data.lambda / double(n) * beta.dot(shared->xtx * beta);
    return u;
  };
  auto gradient_potential = [shared, n](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = shared->data.x * beta;
    Eigen::VectorXd residual(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) residual[i] = logistic(z[i]) - shared->data.y[i];
    Eigen::VectorXd g = shared->data.x.transpose() * residual;
    g += (shared->data.lambda / double(n)) * (shared->xtx * beta);
    return g;
  };

  // Damped Newton for the mode: Hessian X^T Lambda(beta) X is positive
  // definite, so the Newton direction always descends.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  double u_val = potential(beta);
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd g = gradient_potential(beta);
    if (g.norm() <= 1e-8) {
      converged = true;
      break;
    }
    const Eigen::VectorXd z = shared->data.x * beta;
    Eigen::VectorXd lam(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = logistic(z[i]);
      lam[i] = s * (1.0 - s) + shared->data.lambda / double(n);
    }
    const Eigen::MatrixXd h =
        shared->data.x.transpose() * lam.asDiagonal() * shared->data.x;
    const Eigen::VectorXd dir = Eigen::LLT<Eigen::MatrixXd>(h).solve(g);
    double step = 1.0;
    Eigen::VectorXd candidate = beta - step * dir;
    double u_candidate = potential(candidate);
    while (u_candidate > u_val && step > 1e-10) {
      step *= 0.5;
      candidate = beta - step * dir;
      u_candidate = potential(candidate);
    }
    beta = candidate;
    u_val = u_candidate;
  }
  if (!converged && gradient_potential(beta).norm() > 1e-8) {
    throw SingularityError("logistic mode: Newton failed to converge in 200 iterations");
  }

  // Exact kappa(X^T X) from the data's singular values via sym_eig.
  const SymEig xtx_eig = sym_eig(shared->xtx);
  const double kappa_xtx = xtx_eig.values.maxCoeff() / xtx_eig.values.minCoeff();

  TargetModel target;
  target.name = "logistic_regression";
  target.dim = d;
  target.mode = beta;
  target.condition_number =
      kappa_xtx * (double(n) / 4.0 + shared->data.lambda) / shared->data.lambda;
  target.log_density = [potential](const Eigen::VectorXd& b) { return -potential(b); };
  target.grad_log_density = [gradient_potential](const Eigen::VectorXd& b) {
    return Eigen::VectorXd(-gradient_potential(b));
  };
  return target;
}

TargetModel make_logistic_regression(Eigen::Index d, std::uint64_t seed) {
  return logistic_target_from_data(make_logistic_data(d, seed));
}

TargetModel xy_mean_field(Eigen::Index d, double beta) {
  if (d < 2) throw std::invalid_argument("xy_mean_field: need d >= 2");
  if (beta < 0.0) throw std::invalid_argument("xy_mean_field: beta must be >= 0");
  TargetModel target;
  target.name = "xy_mean_field";
  target.dim = d;
  target.mode = Eigen::VectorXd::Zero(d);
  // U(theta) = -(C^2 + S^2) / (2d); with unit couplings the double sum over
  // cos(theta_i - theta_j) collapses to C^2 + S^2.
  target.log_density = [beta, d](const Eigen::VectorXd& theta) {
    const double c = theta.array().cos().sum();
    const double s = theta.array().sin().sum();
    return beta * (c * c + s * s) / (2.0 * double(d));
  };
  target.grad_log_density = [beta, d](const Eigen::VectorXd& theta) {
    const Eigen::ArrayXd cosx = theta.array().cos();
    const Eigen::ArrayXd sinx = theta.array().sin();
    const double c = cosx.sum();
    const double s = sinx.sum();
    return Eigen::VectorXd(-(beta / double(d)) * (c * sinx - s * cosx));
  };
  return target;
}

Eigen::VectorXd sample_exact(const TargetModel& target, Rng& rng) {
  if (!target.gaussian) {
    throw std::invalid_argument("sample_exact: target has no Gaussian metadata");
  }
  const GaussianSpectrum& g = *target.gaussian;
  const Eigen::VectorXd xi = rng.normal_vector(target.dim);
  return g.mean + g.eigenvectors * (g.eigenvalues.cwiseSqrt().cwiseProduct(xi));
}

}  // namespace eigmala
