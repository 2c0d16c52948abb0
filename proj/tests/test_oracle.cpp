#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orbitot/errors.hpp"
#include "orbitot/oracle.hpp"
#include "support.hpp"

using namespace orbitot;
using orbitot::testing::gaussian_matrix;
using orbitot::testing::random_spd;
using orbitot::testing::random_vector;

namespace {

double brute_force_assignment(const Matrix& c) {
  std::vector<int> perm(static_cast<std::size_t>(c.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) total += c(static_cast<Eigen::Index>(i), perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(c.rows());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("hungarian") {
  SUBCASE("trivial instances") {
    Matrix one(1, 1);
    one << 3.5;
    const Assignment a = hungarian(one);
    CHECK(a.permutation == std::vector<int>{0});
    CHECK(a.cost == 3.5);

    Matrix anti(3, 3);
    anti << 9, 9, 1, 9, 1, 9, 1, 9, 9;
    const Assignment b = hungarian(anti);
    CHECK(b.permutation == std::vector<int>{2, 1, 0});
    CHECK(b.cost == doctest::Approx(1.0));

    const Assignment e = hungarian(Matrix(0, 0));
    CHECK(e.permutation.empty());
  }
  SUBCASE("agrees with enumeration on 7x7") {
    int discrepancies = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Matrix c = gaussian_matrix(7, 7, seed).cwiseAbs();
      const Assignment a = hungarian(c);
      std::vector<int> sorted = a.permutation;
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
      double total = 0.0;
      for (int i = 0; i < 7; ++i) total += c(i, a.permutation[i]);
      CHECK(total / 7.0 == doctest::Approx(a.cost).epsilon(1e-14));
      if (std::abs(a.cost - brute_force_assignment(c)) > 1e-12) ++discrepancies;
    }
    CHECK(discrepancies == 0);
  }
  SUBCASE("negative costs are allowed") {
    const Matrix c = gaussian_matrix(6, 6, 77);
    CHECK(hungarian(c).cost == doctest::Approx(brute_force_assignment(c)).epsilon(1e-12));
  }
  SUBCASE("input errors") {
    CHECK_THROWS_AS(hungarian(Matrix::Zero(2, 3)), InvalidArgument);
    Matrix bad = Matrix::Zero(2, 2);
    bad(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(hungarian(bad), InvalidArgument);
  }
}

TEST_CASE("squared_distance_matrix") {
  const Matrix x = gaussian_matrix(4, 3, 1);
  const Matrix y = gaussian_matrix(5, 3, 2);
  const Matrix d = squared_distance_matrix(x, y);
  REQUIRE(d.rows() == 4);
  REQUIRE(d.cols() == 5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(d(i, j) == doctest::Approx((x.row(i) - y.row(j)).squaredNorm()).epsilon(1e-12));
  CHECK(squared_distance_matrix(x, x).diagonal().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(squared_distance_matrix(x, x).minCoeff() >= 0.0);
  CHECK_THROWS_AS(squared_distance_matrix(x, gaussian_matrix(2, 2, 3)), DimensionMismatch);
}

TEST_CASE("sampled_kantorovich") {
  const auto n01 = Marginal1D::normal(0.0, 1.0);
  CHECK(sampled_kantorovich(n01, n01, 200, 5, 5) == 0.0);
  CHECK(sampled_kantorovich(n01, Marginal1D::normal(3.0, 1.0), 512, 11) ==
        doctest::Approx(9.0).epsilon(0.10));
  CHECK(sampled_kantorovich(Marginal1D::exponential(1.0), Marginal1D::exponential(2.0), 512, 12) ==
        doctest::Approx(0.5).epsilon(0.15));
  CHECK(sampled_kantorovich(n01, n01, 64, 1) == sampled_kantorovich(n01, n01, 64, 1));
  CHECK_THROWS_AS(sampled_kantorovich(n01, n01, 2049, 1), InvalidArgument);
  CHECK_THROWS_AS(sampled_kantorovich(n01, n01, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(sampled_kantorovich(n01, GaussianParams(Vector::Zero(2), SpdMatrix::identity(2)), 8, 1),
                  DimensionMismatch);
}

TEST_CASE("empirical cost approaches the closed form as n grows") {
  const GaussianParams a(Vector::Zero(1), SpdMatrix::identity(1));
  const GaussianParams b(Vector::Constant(1, 2.0), SpdMatrix(Matrix::Constant(1, 1, 2.25)));
  const double exact = gaussian_cost(a, b);
  CHECK(exact == doctest::Approx(4.25));
  std::vector<double> small;
  std::vector<double> large;
  for (std::uint64_t seed = 0; seed < 11; ++seed) {
    small.push_back(std::abs(sampled_kantorovich(a, b, 64, seed) - exact));
    large.push_back(std::abs(sampled_kantorovich(a, b, 1024, seed) - exact));
  }
  CHECK(median(large) < median(small));
}

TEST_CASE("mc_monge_cost") {
  const GaussianParams g0(random_vector(2, 1), random_spd(2, 2));
  const GaussianParams g1(random_vector(2, 3), random_spd(2, 4));

  const McEstimate id = mc_monge_cost(AffineMap{Vector::Zero(2), Matrix::Identity(2, 2)}, g0, 1000, 5);
  CHECK(id.estimate == 0.0);
  CHECK(id.std_error == 0.0);
  CHECK(id.within(0.0));

  const McEstimate est = mc_monge_cost(gaussian_map(g0, g1), g0, 100000, 6);
  CHECK(est.n == 100000);
  CHECK(est.within(gaussian_cost(g0, g1), 3.0));

  const auto w0 = WishartParams(SpdMatrix::identity(1), 3.0);
  const auto w1 = WishartParams(SpdMatrix(Matrix::Constant(1, 1, 2.0)), 3.0);
  CHECK(mc_monge_cost(wishart_map(w0, w1), w0, 100000, 7).within(15.0, 3.0));

  CHECK_THROWS_AS(mc_monge_cost(gaussian_map(g0, g1), g0, 1, 8), InvalidArgument);

  McEstimate m;
  m.estimate = 1.0;
  m.std_error = 0.1;
  CHECK(m.within(1.25));
  CHECK_FALSE(m.within(1.35));
}

TEST_CASE("mc_wishart_moment") {
  const Matrix zero = Matrix::Zero(2, 2);
  const McEstimate z = mc_wishart_moment(zero, Matrix::Identity(2, 2), 5.0, 2, 1000, 1);
  CHECK(z.estimate == 0.0);

  const Matrix id = Matrix::Identity(2, 2);
  CHECK(wishart_moment(id, id, 5.0, 2) == doctest::Approx(80.0));
  CHECK(mc_wishart_moment(id, id, 5.0, 2, 1000000, 2).within(80.0, 3.0));

  int misses = 0;
  for (std::uint64_t k = 0; k < 3; ++k) {
    const Matrix u = gaussian_matrix(3, 3, 10 + k);
    const Matrix v = gaussian_matrix(3, 3, 20 + k);
    if (!mc_wishart_moment(u, v, 6.0, 3, 200000, 30 + k).within(wishart_moment(u, v, 6.0, 3), 3.0)) {
      ++misses;
    }
  }
  CHECK(misses == 0);
  CHECK_THROWS_AS(mc_wishart_moment(id, id, 5.0, 2, 1, 1), InvalidArgument);
}

TEST_CASE("continuity_probe") {
  const Vector z = Vector::Zero(2);
  SUBCASE("nondegenerate inputs are stable along the ladder") {
    const SpdMatrix a = random_spd(2, 1);
    const SpdMatrix b = random_spd(2, 2);
    const Vector m1 = random_vector(2, 3);
    const auto values = continuity_probe(z, a, m1, b, {1e-6, 1e-8, 1e-10});
    REQUIRE(values.size() == 3);
    for (double v : values) CHECK(v == doctest::Approx(gaussian_cost(GaussianParams(z, a), GaussianParams(m1, b))).epsilon(1e-6));
  }
  SUBCASE("singular target converges to the PSD limit") {
    const Matrix c0 = Matrix::Identity(2, 2);
    Matrix c1 = Matrix::Zero(2, 2);
    c1(0, 0) = 1.0;
    const std::vector<double> ladder{1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
    const auto values = continuity_probe(z, c0, z, c1, ladder);
    const double limit = psd_gaussian_cost(z, c0, z, c1);
    CHECK(limit == doctest::Approx(1.0));
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      CHECK(std::abs(values[k + 1] - limit) < std::abs(values[k] - limit));
    }
    // Distance to the limit shrinks like 2√ε.
    for (std::size_t k = 0; k < values.size(); ++k) {
      CHECK(limit - values[k] == doctest::Approx(2.0 * std::sqrt(ladder[k])).epsilon(0.06));
    }
  }
  SUBCASE("ladder validation") {
    const Matrix id = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(continuity_probe(z, id, z, id, {}), InvalidArgument);
    CHECK_THROWS_AS(continuity_probe(z, id, z, id, {1e-4, 1e-2}), InvalidArgument);
    CHECK_THROWS_AS(continuity_probe(z, id, z, id, {1e-4, 1e-4}), InvalidArgument);
    CHECK_THROWS_AS(continuity_probe(z, id, z, id, {1e-13}), InvalidArgument);
    CHECK_THROWS_AS(continuity_probe(z, id, z, id, {std::nan("")}), InvalidArgument);
  }
}

TEST_CASE("paired_assignment_check") {
  const GaussianParams g0(random_vector(3, 1), random_spd(3, 2));
  const GaussianParams g1(random_vector(3, 3), random_spd(3, 4));
  const PairedAssignment p = paired_assignment_check(gaussian_map(g0, g1), g0, 256, 9);
  CHECK(p.n == 256);
  CHECK(p.assignment_cost <= p.monge_cost + 1e-12);
  CHECK(p.relative_gap < 1e-9);

  // A rotation is measure preserving but not monotone: the matching beats it.
  Matrix q = haar_orthogonal(3, 10);
  const GaussianParams iso(Vector::Zero(3), SpdMatrix::identity(3));
  const PairedAssignment r = paired_assignment_check(AffineMap{Vector::Zero(3), q}, iso, 256, 11);
  CHECK(r.relative_gap > 0.1);
}

TEST_CASE("validate") {
  const GaussianParams g0(Vector::Zero(2), random_spd(2, 21));
  const GaussianParams g1(random_vector(2, 22), random_spd(2, 23));
  const TransportSolution sol = solve(g0, g1);
  ValidationConfig cfg;
  cfg.n_samples = 256;
  cfg.n_trials = 3;
  cfg.mc_samples = 20000;
  const OracleReport r = validate(g0, g1, sol, cfg);
  CHECK(r.passed());
  CHECK(r.closed_form == sol.cost);
  CHECK(r.trials.size() == 3);
  for (std::size_t t = 0; t < r.trials.size(); ++t) {
    CHECK(r.trials[t].n == 256);
    CHECK(r.trials[t].seed == derive_seed(cfg.base_seed, r.trials[t].trial));
  }
  CHECK(r.checks.size() == 5);
  for (const auto& c : r.checks) {
    CAPTURE(c.name);
    CHECK((!c.applicable || c.passed));
  }

  SUBCASE("deterministic for a fixed seed") {
    const OracleReport again = validate(g0, g1, sol, cfg);
    CHECK(again.assignment_kantorovich == r.assignment_kantorovich);
    CHECK(again.mc_monge.estimate == r.mc_monge.estimate);
    CHECK(again.paired.assignment_cost == r.paired.assignment_cost);
    cfg.base_seed = 43;
    CHECK(validate(g0, g1, sol, cfg).mc_monge.estimate != r.mc_monge.estimate);
  }
  SUBCASE("a wrong closed form is caught") {
    TransportSolution wrong = sol;
    wrong.cost *= 1.5;
    CHECK_FALSE(validate(g0, g1, wrong, cfg).passed());
  }
  SUBCASE("a non-optimal map is caught") {
    TransportSolution wrong = sol;
    Matrix q = haar_orthogonal(2, 5);
    wrong.map = AffineMap{Vector::Zero(2), q};
    wrong.certificate = certify(wrong.map, g0, g1);
    CHECK_FALSE(validate(g0, g1, wrong, cfg).passed());
  }
}
