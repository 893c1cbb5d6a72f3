#include "eigmala/diagnostics.hpp"

#include "eigmala/errors.hpp"
#include "eigmala/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eigmala {

double ess(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size();
  if (n < 100) throw std::invalid_argument("ess: need at least 100 samples");
  if (!series.allFinite()) throw std::invalid_argument("ess: series has non-finite values");

  const double mean = series.mean();
  const Eigen::VectorXd centred = series.array() - mean;
  const double c0 = centred.squaredNorm() / static_cast<double>(n);
  const double scale = std::max(1.0, mean * mean);
  if (c0 <= 1e-300 * scale) {
    throw StuckChainError("ess: series has zero variance");
  }

  auto autocov = [&](Eigen::Index lag) {
    return centred.head(n - lag).dot(centred.tail(n - lag)) / static_cast<double>(n);
  };

  // Initial-positive-sequence truncation: add pair sums rho_{2j} + rho_{2j+1}
  // while they stay positive.
  double tau = -1.0;
  for (Eigen::Index j = 0; 2 * j + 1 < n; ++j) {
    const double pair = (autocov(2 * j) + autocov(2 * j + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  // tau < 2/3 (including the pathological tau <= 0) maps onto the 1.5 n cap.
  const double n_d = static_cast<double>(n);
  return n_d / std::max(tau, 2.0 / 3.0);
}

double sin_squared(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  if (v.size() != w.size()) throw DimensionMismatchError("sin_squared: size mismatch");
  const double nv = v.squaredNorm();
  const double nw = w.squaredNorm();
  if (nv == 0.0 || nw == 0.0) {
    throw std::invalid_argument("sin_squared: zero vector");
  }
  const double dot = v.dot(w);
  const double value = 1.0 - (dot * dot) / (nv * nw);
  return std::clamp(value, 0.0, 1.0);
}

double condition_number_gaussian(const Eigen::MatrixXd& sigma, const Preconditioner& p) {
  const Eigen::Index d = sigma.rows();
  const SymEig sigma_eig = sym_eig(sigma);
  if (sigma_eig.values.minCoeff() <= 0.0) {
    throw SingularityError("condition_number_gaussian: covariance is singular");
  }
  const Eigen::MatrixXd sigma_inv = sigma_eig.vectors *
                                    sigma_eig.values.cwiseInverse().asDiagonal() *
                                    sigma_eig.vectors.transpose();
  const Eigen::MatrixXd l = p.dense_L(d);
  Eigen::MatrixXd b = l.transpose() * sigma_inv * l;
  b = 0.5 * (b + b.transpose());
  const SymEig b_eig = sym_eig(b);
  return b_eig.values.maxCoeff() / b_eig.values.minCoeff();
}

EssReport median_over_coordinates(const Eigen::MatrixXd& output, double window) {
  if (window <= 0.0 || window > 1.0) {
    throw std::invalid_argument("median_over_coordinates: window must lie in (0, 1]");
  }
  const Eigen::Index n = output.rows();
  const Eigen::Index d = output.cols();
  const Eigen::Index take = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
                                                          std::llround(window * double(n))));
  const Eigen::MatrixXd suffix = output.bottomRows(take);

  EssReport report;
  report.n_samples = take;
  report.per_coordinate_ess.resize(d);
  std::vector<double> good;
  good.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    try {
      const double value = ess(suffix.col(j));
      report.per_coordinate_ess[j] = value;
      good.push_back(value);
    } catch (const StuckChainError&) {
      report.per_coordinate_ess[j] = std::numeric_limits<double>::quiet_NaN();
      report.stuck_coordinates.push_back(j);
    }
  }

  const auto stuck = static_cast<double>(report.stuck_coordinates.size());
  if (stuck > 0.05 * static_cast<double>(d) || good.empty()) {
    report.valid = false;
    report.median_ess = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  std::sort(good.begin(), good.end());
  const std::size_t mid = good.size() / 2;
  report.median_ess = (good.size() % 2 == 1) ? good[mid]
                                             : 0.5 * (good[mid - 1] + good[mid]);
  return report;
}

Eigen::VectorXd leading_direction(const Preconditioner& p, Eigen::Index dim) {
  return std::visit(
      [&](const auto& v) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, IdentityPrecond>) {
          return Eigen::VectorXd::Unit(dim, 0);
        } else if constexpr (std::is_same_v<T, DiagonalPrecond>) {
          Eigen::Index argmax = 0;
          v.scales.maxCoeff(&argmax);
          return Eigen::VectorXd::Unit(dim, argmax);
        } else if constexpr (std::is_same_v<T, EigenChainPrecond>) {
          // Column 1 of Q is the first learned eigenvector.
          return chain_apply(v.chain, Eigen::VectorXd::Unit(dim, 0));
        } else if constexpr (std::is_same_v<T, DiagLowRankPrecond>) {
          Eigen::MatrixXd m = v.lowrank * v.lowrank.transpose();
          m.diagonal() += v.diag;
          return sym_eig(m).vectors.col(0);
        } else {
          const Eigen::MatrixXd l = p.dense_L(dim);
          Eigen::MatrixXd m = l * l.transpose();
          m = 0.5 * (m + m.transpose());
          return sym_eig(m).vectors.col(0);
        }
      },
      p.variant());
}

}  // namespace eigmala
