#include "eigmala/errors.hpp"
#include "eigmala/householder.hpp"
#include "eigmala/linalg.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace eigmala;

namespace {
Eigen::VectorXd unit(Eigen::Index d, Eigen::Index i) { return Eigen::VectorXd::Unit(d, i); }
}  // namespace

TEST_CASE("householder_apply maps v to w and fixes the orthogonal complement") {
  const Eigen::Index d = 4;
  CHECK((householder_apply(unit(d, 0), unit(d, 1), unit(d, 0)) - unit(d, 1)).norm() ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK((householder_apply(unit(d, 0), unit(d, 1), unit(d, 2)) - unit(d, 2)).norm() ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("householder_apply is an involution on random unit vectors") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v = rng.normal_vector(7).normalized();
    Eigen::VectorXd w = rng.normal_vector(7).normalized();
    Eigen::VectorXd x = rng.normal_vector(7).normalized();
    const Eigen::VectorXd once = householder_apply(v, w, x);
    const Eigen::VectorXd twice = householder_apply(v, w, once);
    CHECK((twice - x).norm() <= 1e-12);
  }
}

TEST_CASE("householder_apply rejects degenerate reflectors") {
  const Eigen::VectorXd v = unit(3, 0);
  CHECK_THROWS_AS(householder_apply(v, v, unit(3, 1)), DegenerateReflectorError);
  CHECK_THROWS_AS(householder_apply(v, unit(4, 0), unit(4, 1)), DimensionMismatchError);
}

TEST_CASE("build_orthogonal_factor on the standard basis gives identity factors") {
  const Eigen::Index d = 6, m = 3;
  const HouseholderChain chain = build_orthogonal_factor(Eigen::MatrixXd::Identity(d, m));
  CHECK(chain.count() == m);
  for (const auto& u : chain.reflectors) CHECK(u.size() == 0);
  Rng rng(1);
  const Eigen::VectorXd x = rng.normal_vector(d);
  CHECK((chain_apply(chain, x) - x).norm() == 0.0);
}

TEST_CASE("column property: column i of the materialised chain equals v_i") {
  Rng rng(7);
  const Eigen::Index d = 50, m = 5;
  const Eigen::MatrixXd v = testutil::random_orthonormal(rng, d, m);
  const Eigen::MatrixXd q = chain_dense(build_orthogonal_factor(v));
  CHECK((q.leftCols(m) - v).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("single-reflector chain matches the direct 3x3 Householder evaluation") {
  Eigen::MatrixXd v(3, 1);
  v << 0, 1, 0;
  const HouseholderChain chain = build_orthogonal_factor(v);
  const Eigen::MatrixXd q = chain_dense(chain);
  const Eigen::MatrixXd expected = testutil::dense_householder(unit(3, 0), unit(3, 1));
  CHECK((q - expected).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((chain_apply(chain, unit(3, 0)) - v.col(0)).norm() <= 1e-14);
}

TEST_CASE("build_orthogonal_factor rejects non-orthonormal input") {
  Eigen::MatrixXd bad(4, 2);
  bad.setOnes();
  CHECK_THROWS_AS(build_orthogonal_factor(bad), NotOrthonormalError);
}

TEST_CASE("chain agrees with the dense iterated-reflection oracle") {
  Rng rng(3);
  for (const auto& [d, m] : {std::pair<int, int>{20, 4}, {37, 7}, {64, 1}}) {
    const Eigen::MatrixXd v = testutil::random_orthonormal(rng, d, m);
    const HouseholderChain chain = build_orthogonal_factor(v);
    const Eigen::MatrixXd q_oracle = testutil::dense_orthogonal_factor(v);
    const Eigen::VectorXd x = rng.normal_vector(d);
    CHECK((chain_apply(chain, x) - q_oracle * x).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((chain_apply(chain, x, true) - q_oracle.transpose() * x).cwiseAbs().maxCoeff() <=
          1e-10);
  }
}

TEST_CASE("transpose application exposes the learned coordinates") {
  Rng rng(11);
  const Eigen::Index d = 20, m = 4;
  const Eigen::MatrixXd v = testutil::random_orthonormal(rng, d, m);
  const HouseholderChain chain = build_orthogonal_factor(v);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd y = chain_apply(chain, unit(d, i), /*transpose=*/true);
    for (Eigen::Index k = 0; k < m; ++k) {
      CHECK(y[k] == doctest::Approx(v.col(k)[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("round trip through the chain and its transpose") {
  Rng rng(5);
  const Eigen::MatrixXd v = testutil::random_orthonormal(rng, 30, 6);
  const HouseholderChain chain = build_orthogonal_factor(v);
  const Eigen::VectorXd x = rng.normal_vector(30);
  CHECK((chain_apply(chain, chain_apply(chain, x, true), false) - x).norm() <= 1e-10);
}

TEST_CASE("materialised chains stay orthogonal up to d=200, m=20") {
  Rng rng(13);
  for (const auto& [d, m] : {std::pair<int, int>{200, 20}, {120, 10}, {50, 3}}) {
    const Eigen::MatrixXd v = testutil::random_orthonormal(rng, d, m);
    const Eigen::MatrixXd q = chain_dense(build_orthogonal_factor(v));
    const Eigen::MatrixXd gram = q.transpose() * q;
    CHECK((gram - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((q.leftCols(m) - v).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("gram_schmidt_project fixes orthonormal input") {
  Rng rng(17);
  const Eigen::MatrixXd v = testutil::random_orthonormal(rng, 40, 5);
  CHECK((gram_schmidt_project(v) - v).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gram_schmidt_project on a hand-checkable pair") {
  Eigen::MatrixXd raw(3, 2);
  raw << 2, 1, 0, 1, 0, 0;
  const Eigen::MatrixXd v = gram_schmidt_project(raw);
  CHECK((v.col(0) - unit(3, 0)).norm() <= 1e-14);
  CHECK((v.col(1) - unit(3, 1)).norm() <= 1e-14);
}

TEST_CASE("gram_schmidt_project produces orthonormal columns and is idempotent") {
  Rng rng(19);
  const Eigen::MatrixXd raw = testutil::random_matrix(rng, 100, 8);
  const Eigen::MatrixXd v = gram_schmidt_project(raw);
  CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((gram_schmidt_project(v) - v).cwiseAbs().maxCoeff() <= 1e-10);
  // First column keeps its direction up to positive scaling.
  CHECK(v.col(0).dot(raw.col(0)) > 0.0);
  CHECK((v.col(0) - raw.col(0).normalized()).norm() <= 1e-12);
  // The span is preserved: projecting V onto the column space of raw (built
  // with an independent QR) changes nothing.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(100, 8);
  CHECK((v - basis * (basis.transpose() * v)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("gram_schmidt_project rejects rank-deficient input") {
  Eigen::MatrixXd raw(5, 2);
  raw.col(0) = unit(5, 2);
  raw.col(1) = 3.0 * unit(5, 2);
  CHECK_THROWS_AS(gram_schmidt_project(raw), RankDeficiencyError);
}

TEST_CASE("sym_eig on hand-checked matrices") {
  Eigen::MatrixXd a = Eigen::Vector3d(3, 1, 2).asDiagonal();
  const SymEig eig = sym_eig(a);
  CHECK(eig.values[0] == doctest::Approx(3.0));
  CHECK(eig.values[1] == doctest::Approx(2.0));
  CHECK(eig.values[2] == doctest::Approx(1.0));
  CHECK(std::abs(eig.vectors.col(0)[0]) == doctest::Approx(1.0));
  CHECK(std::abs(eig.vectors.col(1)[2]) == doctest::Approx(1.0));

  Eigen::MatrixXd b(2, 2);
  b << 2, 1, 1, 2;
  const SymEig eb = sym_eig(b);
  CHECK(eb.values[0] == doctest::Approx(3.0));
  CHECK(eb.values[1] == doctest::Approx(1.0));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(eb.vectors.col(0).dot(Eigen::Vector2d(inv_sqrt2, inv_sqrt2))) ==
        doctest::Approx(1.0));
}

TEST_CASE("sym_eig reconstructs random symmetric matrices") {
  Rng rng(23);
  const Eigen::MatrixXd a = testutil::random_symmetric(rng, 30);
  const SymEig eig = sym_eig(a);
  const Eigen::MatrixXd back =
      eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  CHECK((back - a).norm() <= 1e-8 * a.norm());
  CHECK((eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(30, 30))
            .cwiseAbs()
            .maxCoeff() <= 1e-8);
  for (Eigen::Index i = 1; i < 30; ++i) CHECK(eig.values[i - 1] >= eig.values[i]);
}

TEST_CASE("sym_eig rejects non-symmetric input") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 0, 1;
  CHECK_THROWS_AS(sym_eig(a), NotSymmetricError);
}

TEST_CASE("complete_orthonormal_basis extends the leading block") {
  const Eigen::MatrixXd leading = unit(3, 0);
  const Eigen::MatrixXd q = complete_orthonormal_basis(leading, 5);
  CHECK((q.col(0) - unit(3, 0)).norm() == 0.0);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("complete_orthonormal_basis is orthogonal in d=150 and bitwise-preserves input") {
  const Eigen::Index d = 150;
  Eigen::MatrixXd leading = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(double(d)));
  const Eigen::MatrixXd q = complete_orthonormal_basis(leading, 77);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index i = 0; i < d; ++i) CHECK(q(i, 0) == leading(i, 0));
  // Deterministic in the seed.
  const Eigen::MatrixXd q2 = complete_orthonormal_basis(leading, 77);
  CHECK((q - q2).cwiseAbs().maxCoeff() == 0.0);
}
