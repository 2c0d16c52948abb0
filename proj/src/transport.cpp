#include "orbitot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "orbitot/detail/overloaded.hpp"
#include "orbitot/errors.hpp"
#include "orbitot/group.hpp"

namespace orbitot {

using detail::overloaded;

namespace {

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(os.str());
  }
}

void require_orthogonal(const Matrix& q, int d) {
  if (q.rows() != d || q.cols() != d) throw DimensionMismatch("rotation has the wrong size");
  const double r = orthogonality_residual(q);
  if (!(r <= tol::kOrthogonal)) {
    std::ostringstream os;
    os << "matrix is not orthogonal (residual " << r << ")";
    throw InvalidArgument(os.str());
  }
}

void require_shared_dof(const WishartParams& a, const WishartParams& b) {
  require_same_dim(a.dim(), b.dim(), "wishart");
  if (a.dof != b.dof) {
    std::ostringstream os;
    os << "Wishart laws must share degrees of freedom to lie on one orbit (" << a.dof << " vs "
       << b.dof << ")";
    throw InvalidArgument(os.str());
  }
}

void require_same_generator(const EllipticalParams& a, const EllipticalParams& b) {
  require_same_dim(a.dim(), b.dim(), "elliptical");
  if (a.generator.kind != b.generator.kind || a.generator.nu != b.generator.nu) {
    throw InvalidArgument("elliptical laws must share a generator to lie on one orbit");
  }
}

// Tr((Σ₁^{1/2} Σ₀ Σ₁^{1/2})^{1/2}) on raw PSD matrices.
double bures_fidelity_trace(const Matrix& cov0, const Matrix& cov1) {
  const Matrix r1 = psd_sqrt_clamped(cov1);
  const Matrix inner = symmetrize(r1 * cov0 * r1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(inner, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw SpectrumError("eigensolver did not converge");
  return eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

void require_psd_input(const Vector& m, const Matrix& cov, const char* what) {
  if (cov.rows() != cov.cols() || cov.rows() != m.size()) {
    throw DimensionMismatch(std::string(what) + ": mean and covariance sizes differ");
  }
  if (!cov.allFinite() || !m.allFinite()) {
    throw InvalidArgument(std::string(what) + ": non-finite entries");
  }
  if (relative_asymmetry(cov) > tol::kSymmetry) {
    throw InvalidArgument(std::string(what) + ": covariance is not symmetric");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian

double gaussian_cost(const GaussianParams& a, const GaussianParams& b) {
  require_same_dim(a.dim(), b.dim(), "gaussian_cost");
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double cov_term = a.cov.trace() + b.cov.trace() - 2.0 * bures_fidelity_trace(a.cov, b.cov);
  return std::max(0.0, mean_term + cov_term);
}

Matrix bures_transport_matrix(const SpdMatrix& s0, const SpdMatrix& s1) {
  require_same_dim(s0.dim(), s1.dim(), "transport matrix");
  const SpdMatrix r0 = psd_sqrt(s0);
  const SpdMatrix r0_inv = psd_inv_sqrt(s0);
  const Matrix middle = psd_sqrt_clamped(symmetrize(r0.matrix() * s1.matrix() * r0.matrix()));
  return symmetrize(r0_inv.matrix() * middle * r0_inv.matrix());
}

AffineMap gaussian_map(const GaussianParams& a, const GaussianParams& b) {
  require_same_dim(a.dim(), b.dim(), "gaussian_map");
  Matrix t = bures_transport_matrix(a.cov, b.cov);
  Vector shift = b.mean - t * a.mean;
  return {std::move(shift), std::move(t)};
}

double gaussian_psi(const GaussianParams& a, const GaussianParams& b, const Matrix& q) {
  require_same_dim(a.dim(), b.dim(), "gaussian_psi");
  require_orthogonal(q, a.dim());
  const Matrix r0 = psd_sqrt(a.cov).matrix();
  const Matrix r1 = psd_sqrt(b.cov).matrix();
  return (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() -
         2.0 * (r1 * q * r0).trace();
}

Matrix gaussian_optimal_rotation(const GaussianParams& a, const GaussianParams& b) {
  require_same_dim(a.dim(), b.dim(), "gaussian_optimal_rotation");
  return trace_align(psd_sqrt(a.cov).matrix() * psd_sqrt(b.cov).matrix());
}

AffineMap gaussian_map_via_group(const GaussianParams& a, const GaussianParams& b) {
  require_same_dim(a.dim(), b.dim(), "gaussian_map_via_group");
  const AffineElement g0 = orbit_element(a);
  const AffineElement g1 = orbit_element(b);
  const AffineElement h{Vector::Zero(a.dim()), gaussian_optimal_rotation(a, b)};
  AffineElement t = compose(g1, compose(h, inverse(g0)));
  return {std::move(t.shift), std::move(t.linear)};
}

double psd_gaussian_cost(const Vector& m0, const Matrix& cov0, const Vector& m1,
                         const Matrix& cov1) {
  require_psd_input(m0, cov0, "psd_gaussian_cost");
  require_psd_input(m1, cov1, "psd_gaussian_cost");
  require_same_dim(static_cast<int>(m0.size()), static_cast<int>(m1.size()), "psd_gaussian_cost");
  const double value = (m0 - m1).squaredNorm() + cov0.trace() + cov1.trace() -
                       2.0 * bures_fidelity_trace(cov0, cov1);
  return std::max(0.0, value);
}

double regularized_gaussian_cost(const Vector& m0, const Matrix& cov0, const Vector& m1,
                                 const Matrix& cov1, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("regularization must be a nonnegative finite number");
  }
  const auto d0 = cov0.rows();
  const auto d1 = cov1.rows();
  return psd_gaussian_cost(m0, cov0 + eps * Matrix::Identity(d0, d0), m1,
                           cov1 + eps * Matrix::Identity(d1, d1));
}

double elliptical_cost(const EllipticalParams& a, const EllipticalParams& b) {
  require_same_generator(a, b);
  return gaussian_cost(GaussianParams(a.location, a.dispersion),
                       GaussianParams(b.location, b.dispersion));
}

AffineMap elliptical_map(const EllipticalParams& a, const EllipticalParams& b) {
  require_same_generator(a, b);
  return gaussian_map(GaussianParams(a.location, a.dispersion),
                      GaussianParams(b.location, b.dispersion));
}

// ---------------------------------------------------------------------------
// Wishart

double wishart_cost(const WishartParams& a, const WishartParams& b) {
  require_shared_dof(a, b);
  const double p = a.dof;
  const Matrix& s0 = a.scale;
  const Matrix& s1 = b.scale;
  const Vector lambda = svd(psd_sqrt(a.scale).matrix() * psd_sqrt(b.scale).matrix()).sigma;
  const double tr_lambda = lambda.sum();
  const double tr_lambda_sq = lambda.squaredNorm();
  const double tr0 = s0.trace();
  const double tr1 = s1.trace();
  // Tr(Σ₀Σ₁) as an elementwise sum is exactly symmetric in the arguments.
  const double tr01 = s0.cwiseProduct(s1).sum();
  const double value = p * (tr0 * tr0 + tr1 * tr1 - 2.0 * tr_lambda * tr_lambda -
                            2.0 * tr_lambda_sq) -
                       2.0 * p * p * tr01 + p * (p + 1.0) * (s0.squaredNorm() + s1.squaredNorm());
  return std::max(0.0, value);
}

CongruenceMap wishart_map(const WishartParams& a, const WishartParams& b) {
  require_shared_dof(a, b);
  return {bures_transport_matrix(a.scale, b.scale)};
}

double wishart_moment(const Matrix& u, const Matrix& v, double p, int d) {
  if (u.rows() != d || u.cols() != d || v.rows() != d || v.cols() != d) {
    throw DimensionMismatch("wishart_moment: U and V must be d x d");
  }
  return p * u.trace() * v.trace() + p * (u * v.transpose()).trace() + p * p * (u * v).trace();
}

double wishart_psi(const WishartParams& a, const WishartParams& b, const Matrix& q) {
  require_shared_dof(a, b);
  require_orthogonal(q, a.dim());
  const double p = a.dof;
  const Matrix& s0 = a.scale;
  const Matrix& s1 = b.scale;
  const Matrix m = psd_sqrt(a.scale).matrix() * psd_sqrt(b.scale).matrix();
  const Matrix mq = m * q;
  const double first = p * s0.trace() * s0.trace() + p * (p + 1.0) * s0.squaredNorm();
  const double second = p * s1.trace() * s1.trace() + p * (p + 1.0) * s1.squaredNorm();
  const double cross =
      p * mq.trace() * mq.trace() + p * (mq * mq).trace() + p * p * (m * m.transpose()).trace();
  return first + second - 2.0 * cross;
}

Matrix wishart_optimal_rotation(const WishartParams& a, const WishartParams& b) {
  require_shared_dof(a, b);
  return trace_align(psd_sqrt(a.scale).matrix() * psd_sqrt(b.scale).matrix());
}

// ---------------------------------------------------------------------------
// One-dimensional and product laws

double exponential_product_cost(const Vector& rates0, const Vector& rates1) {
  require_same_dim(static_cast<int>(rates0.size()), static_cast<int>(rates1.size()),
                   "exponential_product_cost");
  if (!(rates0.minCoeff() > 0.0) || !(rates1.minCoeff() > 0.0)) {
    throw InvalidArgument("exponential rates must be positive");
  }
  return 2.0 * (rates0.cwiseInverse() - rates1.cwiseInverse()).squaredNorm();
}

QuadratureResult quantile_cost_detailed(const Marginal1D& a, const Marginal1D& b) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr unsigned kMaxDepth = 30;
  constexpr double kRelTol = 1e-10;
  const double u_max = -std::log(kQuantileEdge);

  // Each half in the variable u = -ln t (lower) or u = -ln(1 - t) (upper):
  // endpoint singularities of the quantiles become smooth decaying tails.
  auto lower = [&](double u) {
    const double t = std::exp(-u);
    const double diff = b.quantile(t) - a.quantile(t);
    return diff * diff * t;
  };
  auto upper = [&](double u) {
    const double s = std::exp(-u);
    const double diff = b.upper_quantile(s) - a.upper_quantile(s);
    return diff * diff * s;
  };
  // Mass beyond u_max from the local decay rate of the integrand.
  auto tail = [&](const auto& g) {
    const double g1 = g(u_max);
    if (g1 == 0.0) return 0.0;
    const double g0 = g(u_max - 1.0);
    const double rate = std::log(g0 / g1);
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    return g1 / rate;
  };

  double err_lower = 0.0;
  double err_upper = 0.0;
  const double lo = gauss_kronrod<double, 15>::integrate(lower, std::log(2.0), u_max, kMaxDepth,
                                                         kRelTol, &err_lower);
  const double hi = gauss_kronrod<double, 15>::integrate(upper, std::log(2.0), u_max, kMaxDepth,
                                                         kRelTol, &err_upper);

  QuadratureResult r;
  r.value = lo + hi;
  r.error_estimate = err_lower + err_upper;
  r.tail_estimate = tail(lower) + tail(upper);
  const double target = std::max(1e-8, 1e-6 * std::abs(r.value));
  if (!std::isfinite(r.value) || !(r.error_estimate + r.tail_estimate <= target)) {
    std::ostringstream os;
    os << "quantile_cost quadrature did not converge (" << a.name() << " vs " << b.name()
       << ": estimate " << r.value << ", error " << r.error_estimate << ", tail "
       << r.tail_estimate << ")";
    throw QuadratureError(os.str());
  }
  return r;
}

double quantile_cost(const Marginal1D& a, const Marginal1D& b) {
  return quantile_cost_detailed(a, b).value;
}

QuantileMap quantile_map(const Marginal1D& a, const Marginal1D& b) { return {a, b}; }

std::optional<double> scale_ratio(const Marginal1D& a, const Marginal1D& b) {
  return std::visit(
      overloaded{
          [](const Exponential& x, const Exponential& y) -> std::optional<double> {
            return x.rate / y.rate;
          },
          [](const Weibull& x, const Weibull& y) -> std::optional<double> {
            if (x.shape != y.shape) return std::nullopt;
            return y.scale / x.scale;
          },
          [](const Pareto& x, const Pareto& y) -> std::optional<double> {
            if (x.alpha != y.alpha) return std::nullopt;
            return y.xm / x.xm;
          },
          [](const LogNormal& x, const LogNormal& y) -> std::optional<double> {
            if (x.sigma != y.sigma) return std::nullopt;
            return std::exp(y.mu - x.mu);
          },
          [](const Normal& x, const Normal& y) -> std::optional<double> {
            if (x.mean != 0.0 || y.mean != 0.0) return std::nullopt;
            return y.sd / x.sd;
          },
          [](const auto&, const auto&) -> std::optional<double> { return std::nullopt; }},
      a.law(), b.law());
}

double product1d_cost(const Product1D& a, const Product1D& b) {
  require_same_dim(a.dim(), b.dim(), "product1d_cost");
  double total = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const auto* ea = std::get_if<Exponential>(&a.marginals[i].law());
    const auto* eb = std::get_if<Exponential>(&b.marginals[i].law());
    if (ea != nullptr && eb != nullptr) {
      const double diff = 1.0 / ea->rate - 1.0 / eb->rate;
      total += 2.0 * diff * diff;
    } else {
      total += quantile_cost(a.marginals[i], b.marginals[i]);
    }
  }
  return total;
}

MongeMap product1d_map(const Product1D& a, const Product1D& b) {
  require_same_dim(a.dim(), b.dim(), "product1d_map");
  Vector ratios(a.dim());
  bool diagonal = true;
  for (int i = 0; i < a.dim() && diagonal; ++i) {
    const auto r = scale_ratio(a.marginals[i], b.marginals[i]);
    if (r) ratios(i) = *r;
    else diagonal = false;
  }
  if (diagonal) return DiagMap{ratios};
  ProductQuantileMap m;
  for (int i = 0; i < a.dim(); ++i) m.coords.push_back(quantile_map(a.marginals[i], b.marginals[i]));
  return m;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
const T& same_family(const DistributionSpec& b, const char* family) {
  const auto* p = std::get_if<T>(&b);
  if (p == nullptr) {
    throw InvalidArgument(std::string("both laws must belong to the ") + family + " family");
  }
  return *p;
}

}  // namespace

double transport_cost(const DistributionSpec& a, const DistributionSpec& b) {
  return std::visit(
      overloaded{
          [&](const GaussianParams& x) {
            return gaussian_cost(x, same_family<GaussianParams>(b, "gaussian"));
          },
          [&](const EllipticalParams& x) {
            return elliptical_cost(x, same_family<EllipticalParams>(b, "elliptical"));
          },
          [&](const WishartParams& x) {
            return wishart_cost(x, same_family<WishartParams>(b, "wishart"));
          },
          [&](const Product1D& x) { return product1d_cost(x, same_family<Product1D>(b, "product1d")); },
          [&](const Marginal1D& x) {
            return quantile_cost(x, same_family<Marginal1D>(b, "quantile1d"));
          }},
      a);
}

MongeMap transport_map(const DistributionSpec& a, const DistributionSpec& b) {
  return std::visit(
      overloaded{
          [&](const GaussianParams& x) -> MongeMap {
            return gaussian_map(x, same_family<GaussianParams>(b, "gaussian"));
          },
          [&](const EllipticalParams& x) -> MongeMap {
            return elliptical_map(x, same_family<EllipticalParams>(b, "elliptical"));
          },
          [&](const WishartParams& x) -> MongeMap {
            return wishart_map(x, same_family<WishartParams>(b, "wishart"));
          },
          [&](const Product1D& x) -> MongeMap {
            return product1d_map(x, same_family<Product1D>(b, "product1d"));
          },
          [&](const Marginal1D& x) -> MongeMap {
            return quantile_map(x, same_family<Marginal1D>(b, "quantile1d"));
          }},
      a);
}

TransportSolution solve(const DistributionSpec& a, const DistributionSpec& b) {
  TransportSolution s;
  s.family = family_of(a);
  s.cost = transport_cost(a, b);
  s.map = transport_map(a, b);
  s.certificate = certify(s.map, a, b);
  return s;
}

}  // namespace orbitot
