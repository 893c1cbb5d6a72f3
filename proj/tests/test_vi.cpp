#include "eigmala/errors.hpp"
#include "eigmala/linalg.hpp"
#include "eigmala/vi.hpp"

#include <Eigen/LU>

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace eigmala;

namespace {

// Gaussian N(mean, square^2) for a known symmetric PD square root.
TargetModel gaussian_with_root(const Eigen::VectorXd& mean, const Eigen::MatrixXd& square) {
  const Eigen::Index d = mean.size();
  const SymEig eig = sym_eig(square);
  GaussianSpectrum spectrum;
  spectrum.mean = mean;
  spectrum.eigenvectors = eig.vectors;
  spectrum.eigenvalues = eig.values.cwiseAbs2();
  TargetModel target;
  target.name = "vi_test_gaussian";
  target.dim = d;
  target.gaussian = spectrum;
  auto inv = std::make_shared<Eigen::MatrixXd>(
      eig.vectors * eig.values.cwiseAbs2().cwiseInverse().asDiagonal() *
      eig.vectors.transpose());
  auto mu = std::make_shared<Eigen::VectorXd>(mean);
  target.log_density = [inv, mu](const Eigen::VectorXd& x) {
    const Eigen::VectorXd c = x - *mu;
    return -0.5 * c.dot(*inv * c);
  };
  target.grad_log_density = [inv, mu](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(-(*inv * (x - *mu)));
  };
  return target;
}

// A diag+low-rank state whose factor has eigenvalues comfortably above 1.
VIState stationary_state(Rng& rng, Eigen::Index d, int m) {
  VIState state;
  state.mu = Eigen::VectorXd::Zero(d);
  state.delta.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) state.delta[i] = std::sqrt(4.0 + 2.0 * rng.uniform());
  state.v = 0.4 * testutil::random_matrix(rng, d, m);
  return state;
}

Eigen::MatrixXd factor_of(const VIState& state) {
  Eigen::MatrixXd l = state.v * state.v.transpose();
  l.diagonal() += state.delta.cwiseAbs2();
  return l;
}

}  // namespace

TEST_CASE("SmwInverse matches the dense inverse in d=20, m=3") {
  Rng rng(1);
  const Eigen::Index d = 20;
  Eigen::VectorXd diag(d);
  for (Eigen::Index i = 0; i < d; ++i) diag[i] = 0.5 + rng.uniform();
  const Eigen::MatrixXd v = testutil::random_matrix(rng, d, 3);
  Eigen::MatrixXd l = v * v.transpose();
  l.diagonal() += diag;

  const SmwInverse inverse(diag, v);
  const Eigen::MatrixXd dense_inv = l.inverse();
  const Eigen::VectorXd x = rng.normal_vector(d);
  CHECK((inverse.apply(x) - dense_inv * x).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((inverse.inverse_diagonal() - dense_inv.diagonal()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(inverse.log_det() == doctest::Approx(std::log(l.determinant())).epsilon(1e-10));
}

TEST_CASE("gradient at the reverse-KL optimum is pure Monte Carlo noise") {
  Rng rng(2);
  const Eigen::Index d = 5;
  const VIState state = stationary_state(rng, d, 2);
  const Eigen::MatrixXd l = factor_of(state);
  const TargetModel target = gaussian_with_root(Eigen::VectorXd::Zero(d), l);

  const int b = 10000;
  Eigen::MatrixXd batch(d, b), grads(d, b);
  for (int j = 0; j < b; ++j) {
    batch.col(j) = l * rng.normal_vector(d);
    grads.col(j) = target.grad_log_density(batch.col(j));
  }
  const LowRankGradient grad = vi_grad_L(state, batch, grads);
  CHECK(grad.dense().norm() <= 0.05);
}

TEST_CASE("expected gradient formula -L^{-1} + Sigma^{-1} L away from the optimum") {
  Rng rng(3);
  const Eigen::Index d = 4;
  // Variational factor deliberately different from the target square root.
  VIState state = stationary_state(rng, d, 2);
  const Eigen::MatrixXd l = factor_of(state);

  Eigen::MatrixXd target_root = Eigen::VectorXd::Constant(d, 2.0).asDiagonal();
  const TargetModel target = gaussian_with_root(Eigen::VectorXd::Zero(d), target_root);
  const Eigen::MatrixXd sigma_inv =
      (target_root * target_root.transpose()).inverse();

  const int b = 40000;
  Eigen::MatrixXd batch(d, b), grads(d, b);
  for (int j = 0; j < b; ++j) {
    batch.col(j) = l * rng.normal_vector(d);
    grads.col(j) = target.grad_log_density(batch.col(j));
  }
  const LowRankGradient grad = vi_grad_L(state, batch, grads);
  const Eigen::MatrixXd expected = -l.inverse() + sigma_inv * l;
  CHECK((grad.dense() - expected).norm() <= 0.08 * std::max(1.0, expected.norm()));
}

TEST_CASE("single batch point at mu contributes nothing beyond -L^{-1}") {
  Rng rng(4);
  const Eigen::Index d = 6;
  VIState state = stationary_state(rng, d, 2);
  state.mu = Eigen::VectorXd::Zero(d);
  const Eigen::MatrixXd l = factor_of(state);
  Eigen::MatrixXd batch(d, 1), grads(d, 1);
  batch.col(0) = state.mu;
  grads.col(0) = rng.normal_vector(d);  // arbitrary; multiplied by xi = 0
  const LowRankGradient grad = vi_grad_L(state, batch, grads);
  CHECK((grad.dense() + l.inverse()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("factored gradient actions match the materialised matrix") {
  Rng rng(5);
  const Eigen::Index d = 8;
  const VIState state = stationary_state(rng, d, 3);
  const Eigen::MatrixXd l = factor_of(state);
  Eigen::MatrixXd batch(d, 6), grads(d, 6);
  for (int j = 0; j < 6; ++j) {
    batch.col(j) = state.mu + l * rng.normal_vector(d);
    grads.col(j) = rng.normal_vector(d);
  }
  const LowRankGradient grad = vi_grad_L(state, batch, grads);
  const Eigen::MatrixXd dense = grad.dense();
  const Eigen::MatrixXd w = testutil::random_matrix(rng, d, 3);
  CHECK((grad.apply(w) - dense * w).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((grad.apply_transpose(w) - dense.transpose() * w).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((grad.diagonal() - dense.diagonal()).cwiseAbs().maxCoeff() <= 1e-10);

  // Symmetrised V step: with grads = xi the Monte Carlo part is symmetric,
  // so (grad + grad^T) V collapses to 2 grad V.
  const LowRankGradient sym_grad = vi_grad_L(state, batch, grad.inverse().apply(
      (batch.colwise() - state.mu).eval()));
  const Eigen::MatrixXd sym_dense = sym_grad.dense();
  CHECK((sym_dense - sym_dense.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((sym_grad.apply(w) + sym_grad.apply_transpose(w) - 2.0 * sym_dense * w)
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
}

TEST_CASE("batch-averaged gradient noise scales like 1/sqrt(B)") {
  Rng rng(6);
  const Eigen::Index d = 5;
  const VIState state = stationary_state(rng, d, 2);
  const Eigen::MatrixXd l = factor_of(state);
  const TargetModel target = gaussian_with_root(Eigen::VectorXd::Zero(d), l);

  auto mean_norm = [&](int b, int reps) {
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) {
      Eigen::MatrixXd batch(d, b), grads(d, b);
      for (int j = 0; j < b; ++j) {
        batch.col(j) = l * rng.normal_vector(d);
        grads.col(j) = target.grad_log_density(batch.col(j));
      }
      acc += vi_grad_L(state, batch, grads).dense().norm();
    }
    return acc / double(reps);
  };
  const double small_batch = mean_norm(100, 20);
  const double large_batch = mean_norm(10000, 20);
  const double ratio = small_batch / large_batch;
  CHECK(ratio >= 10.0 / 2.0);
  CHECK(ratio <= 10.0 * 2.0);
}

TEST_CASE("vi_descend with zero learning rates is the identity") {
  Rng rng(7);
  const TargetModel target =
      gaussian_with_root(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
  VIState state = make_vi_state(3, 2, Eigen::VectorXd::Zero(3));
  VIConfig cfg;
  cfg.lr_mu = cfg.lr_delta = cfg.lr_v = 0.0;
  const VIState next = vi_descend(state, target, cfg, rng);
  CHECK((next.mu - state.mu).norm() == 0.0);
  CHECK((next.delta - state.delta).norm() == 0.0);
  CHECK((next.v - state.v).norm() == 0.0);
  CHECK(next.iteration == 1);
}

TEST_CASE("descent converges on an isotropic Gaussian") {
  Eigen::VectorXd theta(3);
  theta << 0.5, -0.3, 0.2;
  const TargetModel target = gaussian_with_root(theta, Eigen::MatrixXd::Identity(3, 3));
  VIConfig cfg;  // default rates, B = 10
  cfg.iterations = 2000;
  cfg.rank = 2;
  Rng rng(8);
  const VIState state = run_vi(target, cfg, rng, Eigen::VectorXd::Zero(3));
  CHECK((state.mu - theta).norm() <= 0.1);
  const Eigen::MatrixXd l = factor_of(state);
  CHECK((l * l - Eigen::MatrixXd::Identity(3, 3)).norm() <= 0.3);
}

TEST_CASE("reverse-KL surrogate decreases over training windows") {
  Eigen::VectorXd theta(4);
  theta << 1.0, -1.0, 0.5, 0.2;
  const TargetModel target = gaussian_with_root(theta, Eigen::MatrixXd::Identity(4, 4));
  VIConfig cfg;
  cfg.rank = 2;
  Rng rng(9);
  VIState state = make_vi_state(4, cfg.rank, Eigen::VectorXd::Zero(4));

  std::vector<double> window_surrogate;
  for (int w = 0; w < 5; ++w) {
    for (int t = 0; t < 200; ++t) state = vi_descend(state, target, cfg, rng);
    window_surrogate.push_back(reverse_kl_surrogate(state, target, rng, 400));
  }
  for (std::size_t w = 1; w < window_surrogate.size(); ++w) {
    CHECK(window_surrogate[w] <= window_surrogate[w - 1] + 0.15);
  }
  CHECK(window_surrogate.back() < window_surrogate.front());
}

TEST_CASE("vi_to_preconditioner freezes the learned parameters") {
  const Eigen::Index d = 15;
  Rng rng(10);

  SUBCASE("identity state acts as identity") {
    VIState state;
    state.mu = Eigen::VectorXd::Zero(d);
    state.delta = Eigen::VectorXd::Ones(d);
    state.v = Eigen::MatrixXd::Zero(d, 2);
    const Preconditioner p = vi_to_preconditioner(state);
    const Eigen::VectorXd x = rng.normal_vector(d);
    CHECK((p.apply_L(x) - x).norm() == 0.0);
  }

  SUBCASE("apply_M matches the dense (D + VV^T)^2 oracle") {
    const VIState state = stationary_state(rng, d, 3);
    const Preconditioner p = vi_to_preconditioner(state);
    const Eigen::MatrixXd l = factor_of(state);
    const Eigen::VectorXd x = rng.normal_vector(d);
    CHECK((p.apply_M(x) - l * l * x).cwiseAbs().maxCoeff() <=
          1e-8 * std::max(1.0, (l * l * x).cwiseAbs().maxCoeff()));
    CHECK((p.apply_L_inv(p.apply_L(x)) - x).norm() <= 1e-8);
  }
}

TEST_CASE("delta clamping keeps the factor positive") {
  // A huge learning rate drives delta through zero; it must be clamped.
  const TargetModel target =
      gaussian_with_root(Eigen::VectorXd::Zero(2), 0.05 * Eigen::MatrixXd::Identity(2, 2));
  VIConfig cfg;
  cfg.lr_delta = 50.0;
  cfg.lr_mu = cfg.lr_v = 0.0;
  Rng rng(11);
  VIState state = make_vi_state(2, 1, Eigen::VectorXd::Zero(2));
  for (int t = 0; t < 5; ++t) state = vi_descend(state, target, cfg, rng);
  CHECK(state.delta.minCoeff() >= 1e-8);
}
