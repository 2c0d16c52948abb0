#include "orbitot/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orbitot/detail/overloaded.hpp"
#include "orbitot/errors.hpp"
#include "orbitot/random.hpp"

namespace orbitot {

using detail::overloaded;

namespace {

constexpr double kSymmetrySlack = 1e-10;

CheckResult spd_check(const Matrix& t) {
  CheckResult r;
  r.applicable = true;
  if (t.rows() == 0 || t.rows() != t.cols() || !t.allFinite()) {
    r.value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(t), Eigen::EigenvaluesOnly);
  r.value = eig.eigenvalues()(0);
  r.passed = relative_asymmetry(t) <= kSymmetrySlack && r.value > 0.0;
  return r;
}

std::vector<Marginal1D> coordinate_marginals(const DistributionSpec& spec) {
  if (const auto* m = std::get_if<Marginal1D>(&spec)) return {*m};
  if (const auto* p = std::get_if<Product1D>(&spec)) return p->marginals;
  throw InvalidArgument("expected a one-dimensional or product law, got " +
                        to_string(family_of(spec)));
}

double gaussian_like_residual(const AffineMap& map, const Vector& m0, const Matrix& s0,
                              const Vector& m1, const Matrix& s1) {
  if (map.linear.rows() != m1.size() || map.linear.cols() != m0.size() || m0.size() != m1.size()) {
    throw DimensionMismatch("affine map dimension does not match the distributions");
  }
  const Matrix pushed = map.linear * s0 * map.linear.transpose();
  const double cov_residual = relative_frobenius_error(pushed, s1);
  const double mean_residual =
      (map.shift + map.linear * m0 - m1).norm() / std::max(1.0, m1.norm());
  return std::max(cov_residual, mean_residual);
}

double ks_residual(const MongeMap& map, const DistributionSpec& a, const DistributionSpec& b) {
  const auto ma = coordinate_marginals(a);
  const auto mb = coordinate_marginals(b);
  if (ma.size() != mb.size()) throw DimensionMismatch("marginal counts differ");
  if (map_input_dim(map) != static_cast<int>(ma.size())) {
    throw DimensionMismatch("map dimension does not match the distributions");
  }
  const Matrix xs = sample(a, kKsSamples, derive_seed(kCertificateSeed, 0));
  const Matrix ys = sample(b, kKsSamples, derive_seed(kCertificateSeed, 1));
  const Matrix mapped = apply_map(map, xs);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < mapped.cols(); ++j) {
    std::vector<double> u(mapped.col(j).data(), mapped.col(j).data() + mapped.rows());
    std::vector<double> v(ys.col(j).data(), ys.col(j).data() + ys.rows());
    worst = std::max(worst, ks_two_sample(std::move(u), std::move(v)));
  }
  return worst;
}

}  // namespace

std::string to_string(Verdict v) {
  return v == Verdict::certified ? "certified" : "upper_bound_only";
}

void CertificateReport::finalize() {
  bool any = false;
  bool ok = true;
  for (const CheckResult* c : {&spd, &pushforward, &monotonicity}) {
    if (!c->applicable) continue;
    any = true;
    ok = ok && c->passed;
  }
  verdict = (any && ok) ? Verdict::certified : Verdict::upper_bound_only;
}

CertificateReport certify_affine(const AffineMap& map) {
  CertificateReport r;
  r.family = Family::gaussian;
  r.spd = spd_check(map.linear);
  r.finalize();
  return r;
}

CertificateReport certify_congruence(const CongruenceMap& map, std::uint64_t probe_seed) {
  CertificateReport r;
  r.family = Family::wishart;
  r.spd = spd_check(map.t);
  if (r.spd.passed) {
    const auto d = map.t.rows();
    const double slack = -1e-10 * std::max(1.0, map.t.squaredNorm());
    Engine rng = make_engine(probe_seed);
    std::normal_distribution<double> normal;
    for (int k = 0; k < kCongruenceProbes && r.spd.passed; ++k) {
      Matrix h(d, d);
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) h(i, j) = normal(rng);
      h = symmetrize(h);
      h /= h.norm();
      const double inner = (h.cwiseProduct(map.t * h * map.t)).sum();
      if (inner < slack) r.spd.passed = false;
    }
  }
  r.finalize();
  return r;
}

CertificateReport certify_monotone(const DiagMap& map) {
  CertificateReport r;
  r.family = Family::product1d;
  r.monotonicity.applicable = true;
  if (map.ratios.size() == 0 || !map.ratios.allFinite()) {
    r.monotonicity.value = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.monotonicity.value = map.ratios.minCoeff();
    r.monotonicity.passed = r.monotonicity.value > 0.0;
  }
  r.finalize();
  return r;
}

CertificateReport certify_monotone(const std::function<double(double)>& map,
                                   const Marginal1D& source, int probe_grid) {
  if (probe_grid < 2) throw InvalidArgument("monotonicity probe grid needs at least 2 points");
  CertificateReport r;
  r.family = Family::quantile1d;
  r.monotonicity.applicable = true;
  std::vector<double> xs(static_cast<std::size_t>(probe_grid));
  std::vector<double> ys(xs.size());
  for (int k = 0; k < probe_grid; ++k) {
    const double t = (k + 0.5) / probe_grid;
    xs[k] = source.quantile(t);
    ys[k] = map(xs[k]);
  }
  double min_slope = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    if (!std::isfinite(ys[k]) || !std::isfinite(ys[k + 1])) finite = false;
    const double dx = xs[k + 1] - xs[k];
    if (!(dx > 0.0)) continue;  // tied empirical order statistics
    min_slope = std::min(min_slope, (ys[k + 1] - ys[k]) / dx);
  }
  r.monotonicity.value = min_slope;
  r.monotonicity.passed = finite && min_slope >= -kMonotoneSlack;
  r.finalize();
  return r;
}

CertificateReport certify_monotone(const QuantileMap& map, int probe_grid) {
  return certify_monotone([&map](double x) { return map(x); }, map.source, probe_grid);
}

CertificateReport certify_monotone(const ProductQuantileMap& map, int probe_grid) {
  CertificateReport r;
  r.family = Family::product1d;
  r.monotonicity.applicable = true;
  r.monotonicity.passed = !map.coords.empty();
  r.monotonicity.value = std::numeric_limits<double>::infinity();
  for (const auto& q : map.coords) {
    const auto c = certify_monotone(q, probe_grid);
    r.monotonicity.passed = r.monotonicity.passed && c.monotonicity.passed;
    r.monotonicity.value = std::min(r.monotonicity.value, c.monotonicity.value);
  }
  r.finalize();
  return r;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS statistic needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  double c = 0.0;
  if (alpha == 0.10) c = 1.224;
  else if (alpha == 0.05) c = 1.358;
  else if (alpha == 0.01) c = 1.628;
  else if (alpha == 0.001) c = 1.949;
  else throw InvalidArgument("unsupported KS significance level");
  const auto nd = static_cast<double>(n);
  const auto md = static_cast<double>(m);
  return c * std::sqrt((nd + md) / (nd * md));
}

double pushforward_residual(const MongeMap& map, const DistributionSpec& a,
                            const DistributionSpec& b) {
  if (family_of(a) != family_of(b)) {
    throw InvalidArgument("push-forward check between different families (" +
                          to_string(family_of(a)) + " vs " + to_string(family_of(b)) + ")");
  }
  return std::visit(
      overloaded{
          [&](const AffineMap& m) -> double {
            if (const auto* ga = std::get_if<GaussianParams>(&a)) {
              const auto& gb = std::get<GaussianParams>(b);
              return gaussian_like_residual(m, ga->mean, ga->cov, gb.mean, gb.cov);
            }
            if (const auto* ea = std::get_if<EllipticalParams>(&a)) {
              const auto& eb = std::get<EllipticalParams>(b);
              if (ea->generator.kind != eb.generator.kind || ea->generator.nu != eb.generator.nu) {
                throw InvalidArgument("elliptical laws with different generators");
              }
              return gaussian_like_residual(m, ea->location, ea->dispersion, eb.location,
                                            eb.dispersion);
            }
            throw InvalidArgument("affine map needs Gaussian or elliptical laws");
          },
          [&](const CongruenceMap& m) -> double {
            const auto* wa = std::get_if<WishartParams>(&a);
            if (wa == nullptr) throw InvalidArgument("congruence map needs Wishart laws");
            const auto& wb = std::get<WishartParams>(b);
            if (wa->dof != wb.dof) throw InvalidArgument("Wishart laws with different dof");
            if (m.t.rows() != wa->dim() || wa->dim() != wb.dim()) {
              throw DimensionMismatch("congruence map dimension does not match");
            }
            return relative_frobenius_error(apply_congruence(m, wa->scale), wb.scale);
          },
          [&](const auto&) -> double { return ks_residual(map, a, b); }},
      map);
}

double pushforward_threshold(Family family) {
  switch (family) {
    case Family::gaussian:
    case Family::elliptical:
    case Family::wishart:
      return kPushforwardTol;
    case Family::product1d:
    case Family::quantile1d:
      return ks_critical_value(kKsSamples, kKsSamples, 0.01);
  }
  return 0.0;
}

CertificateReport certify(const MongeMap& map, const DistributionSpec& a,
                          const DistributionSpec& b) {
  CertificateReport r = std::visit(
      overloaded{[](const AffineMap& m) { return certify_affine(m); },
                 [](const CongruenceMap& m) { return certify_congruence(m); },
                 [](const DiagMap& m) { return certify_monotone(m); },
                 [](const QuantileMap& m) { return certify_monotone(m); },
                 [](const ProductQuantileMap& m) { return certify_monotone(m); }},
      map);
  r.family = family_of(a);
  r.pushforward.applicable = true;
  r.pushforward.value = pushforward_residual(map, a, b);
  r.pushforward.passed = r.pushforward.value < pushforward_threshold(r.family);
  r.finalize();
  return r;
}

}  // namespace orbitot
