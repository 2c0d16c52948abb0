#include <doctest.h>

#include <cmath>

#include "orbitot/errors.hpp"
#include "orbitot/matkit.hpp"
#include "support.hpp"

using namespace orbitot;
using orbitot::testing::gaussian_matrix;
using orbitot::testing::random_spd;

namespace {

double sym_error(const Matrix& m) { return (m - m.transpose()).norm(); }

}  // namespace

TEST_CASE("SpdMatrix construction") {
  SUBCASE("symmetrizes within tolerance") {
    Matrix m(2, 2);
    m << 2.0, 1.0, 1.0 + 1e-14, 3.0;
    SpdMatrix s(m);
    CHECK(sym_error(s.matrix()) == 0.0);
    CHECK(s.eigenvalues()(0) <= s.eigenvalues()(1));
  }
  SUBCASE("rejects asymmetric input") {
    Matrix m(2, 2);
    m << 2.0, 1.0, 0.0, 3.0;
    CHECK_THROWS_AS(SpdMatrix{m}, InvalidArgument);
  }
  SUBCASE("rejects indefinite and singular input") {
    CHECK_THROWS_AS(SpdMatrix::diagonal(Vector::Constant(2, 1.0).cwiseProduct(Vector::LinSpaced(2, 1.0, -1.0))),
                    SpectrumError);
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    CHECK_THROWS_AS(SpdMatrix{m}, SpectrumError);
    // Just below the relative floor.
    Vector d(2);
    d << 1.0, 0.5e-10;
    CHECK_THROWS_AS(SpdMatrix::diagonal(d), SpectrumError);
  }
  SUBCASE("rejects non-square, empty and non-finite") {
    CHECK_THROWS_AS(SpdMatrix{Matrix::Identity(2, 3)}, DimensionMismatch);
    CHECK_THROWS_AS(SpdMatrix{Matrix(0, 0)}, DimensionMismatch);
    Matrix m = Matrix::Identity(2, 2);
    m(0, 0) = std::nan("");
    CHECK_THROWS_AS(SpdMatrix{m}, InvalidArgument);
  }
  SUBCASE("condition number and warning") {
    Vector d(2);
    d << 1.0, 1e-9;
    SpdMatrix s = SpdMatrix::diagonal(d);
    CHECK(s.condition_number() == doctest::Approx(1e9));
    CHECK(condition_warning(s, "cov").has_value());
    CHECK_FALSE(condition_warning(SpdMatrix::identity(3), "cov").has_value());
  }
}

TEST_CASE("psd_sqrt") {
  CHECK(psd_sqrt(SpdMatrix::identity(3)).matrix().isApprox(Matrix::Identity(3, 3)));

  Vector d(2);
  d << 4.0, 9.0;
  Matrix expected = Vector(Vector::LinSpaced(2, 2.0, 3.0)).asDiagonal();
  CHECK((psd_sqrt(SpdMatrix::diagonal(d)).matrix() - expected).norm() < 1e-14);

  const SpdMatrix a = random_spd(4, 7);
  const Matrix s = psd_sqrt(a);
  CHECK(relative_frobenius_error(s * s, a) < 1e-9);
  CHECK(sym_error(s) == 0.0);
  CHECK(psd_sqrt(a).min_eigenvalue() > 0.0);

  SUBCASE("homogeneity") {
    for (double c : {0.01, 3.0, 250.0}) {
      const Matrix lhs = psd_sqrt(SpdMatrix(c * a.matrix()));
      CHECK(relative_frobenius_error(lhs, std::sqrt(c) * s) < 1e-9);
    }
  }
  SUBCASE("property over random matrices") {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
      const int dim = 1 + static_cast<int>(seed % 7);
      const SpdMatrix b = random_spd(dim, seed);
      const Matrix r = psd_sqrt(b);
      CHECK(relative_frobenius_error(r * r, b) < 1e-9);
    }
  }
}

TEST_CASE("psd_inv_sqrt") {
  CHECK(psd_inv_sqrt(SpdMatrix::identity(2)).matrix().isApprox(Matrix::Identity(2, 2)));
  CHECK(psd_inv_sqrt(SpdMatrix::diagonal(Vector::Constant(1, 4.0))).matrix()(0, 0) ==
        doctest::Approx(0.5).epsilon(1e-15));

  const SpdMatrix a = random_spd(5, 11);
  const Matrix s = psd_inv_sqrt(a);
  CHECK((s * a.matrix() * s - Matrix::Identity(5, 5)).norm() < 1e-9);

  Vector d(2);
  d << 1.0, 1e-13;
  CHECK_THROWS_AS(psd_inv_sqrt(SpdMatrix(Matrix(d.asDiagonal()), 1e-14)), IllConditioned);
}

TEST_CASE("psd_sqrt_clamped") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 4.0;
  m(1, 1) = -1e-17;
  const Matrix r = psd_sqrt_clamped(m);
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == 0.0);
}

TEST_CASE("svd") {
  const SvdTriple id = svd(Matrix::Identity(2, 2));
  CHECK(id.sigma.isApprox(Vector::Ones(2)));
  CHECK((id.u * id.vt - Matrix::Identity(2, 2)).norm() < 1e-15);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -2.0;
  const SvdTriple sd = svd(d);
  CHECK(sd.sigma(0) == doctest::Approx(3.0));
  CHECK(sd.sigma(1) == doctest::Approx(2.0));

  for (std::uint64_t seed : {3ULL, 4ULL, 5ULL, 6ULL}) {
    const Matrix a = gaussian_matrix(4, 4, seed);
    const SvdTriple t = svd(a);
    CHECK(relative_frobenius_error(t.u * t.sigma.asDiagonal() * t.vt, a) < 1e-10);
    CHECK(orthogonality_residual(t.u) < 1e-10);
    CHECK(orthogonality_residual(t.vt.transpose()) < 1e-10);
    for (int i = 0; i + 1 < t.sigma.size(); ++i) CHECK(t.sigma(i) >= t.sigma(i + 1));
    // Singular values are the square roots of the eigenvalues of AᵀA.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
    Vector ev = eig.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
    CHECK((ev - t.sigma).norm() < 1e-9);
  }

  CHECK_THROWS_AS(svd(Matrix::Identity(2, 3)), DimensionMismatch);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(svd(bad), InvalidArgument);
}

TEST_CASE("trace_align") {
  CHECK((trace_align(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-12);
  const SpdMatrix p = random_spd(3, 8);
  CHECK((trace_align(p.matrix()) - Matrix::Identity(3, 3)).norm() < 1e-9);

  for (std::uint64_t seed : {5ULL, 15ULL, 25ULL}) {
    const Matrix m = gaussian_matrix(3, 3, seed);
    const Matrix q = trace_align(m);
    CHECK(orthogonality_residual(q) < 1e-10);
    const double best = (m * q).trace();
    CHECK(best == doctest::Approx(svd(m).sigma.sum()).epsilon(1e-9));
    int violations = 0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
      if ((m * haar_orthogonal(3, derive_seed(seed, k))).trace() > best + 1e-12) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("haar_orthogonal") {
  const Matrix one = haar_orthogonal(1, 9);
  CHECK(std::abs(std::abs(one(0, 0)) - 1.0) < 1e-15);
  CHECK(orthogonality_residual(haar_orthogonal(3, 1)) < 1e-10);
  CHECK_THROWS_AS(haar_orthogonal(0, 1), InvalidArgument);
  CHECK((haar_orthogonal(4, 77) - haar_orthogonal(4, 77)).norm() == 0.0);

  // Every entry has mean 0 and variance 1/d under Haar measure.
  const int d = 3;
  const int n = 10000;
  Matrix sum = Matrix::Zero(d, d);
  bool has_reflections = false;
  bool has_rotations = false;
  for (int k = 0; k < n; ++k) {
    const Matrix q = haar_orthogonal(d, derive_seed(2024, static_cast<std::uint64_t>(k)));
    sum += q;
    const double det = q.determinant();
    has_reflections = has_reflections || det < 0.0;
    has_rotations = has_rotations || det > 0.0;
  }
  const double se = std::sqrt(1.0 / d / n);
  CHECK((sum / n).cwiseAbs().maxCoeff() < 4.0 * se);
  CHECK(has_reflections);
  CHECK(has_rotations);
}

TEST_CASE("half vectorization preserves the Frobenius inner product") {
  const Matrix a = orbitot::testing::random_symmetric(4, 1);
  const Matrix b = orbitot::testing::random_symmetric(4, 2);
  const Vector va = half_vectorize(a);
  CHECK(va.size() == 10);
  CHECK(va.dot(half_vectorize(b)) == doctest::Approx((a.cwiseProduct(b)).sum()).epsilon(1e-13));
  CHECK((half_unvectorize(va, 4) - a).norm() < 1e-14);
  CHECK(half_vector_dim(10) == 4);
  CHECK(half_vector_dim(7) == -1);
  CHECK_THROWS_AS(half_unvectorize(va, 3), DimensionMismatch);
}
