#include "orbitot/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include "orbitot/detail/overloaded.hpp"
#include "orbitot/errors.hpp"

namespace orbitot {

namespace {

using detail::overloaded;

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << what << " must be positive and finite (got " << x << ")";
    throw InvalidArgument(os.str());
  }
}

// Uniform on the open interval (0,1) with 53 random bits.
double uniform_open(Engine& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double empirical_quantile(const std::vector<double>& xs, double t) {
  const auto n = static_cast<double>(xs.size());
  const double pos = t * n - 0.5;  // fractional index of the order statistic
  if (pos <= 0.0) return xs.front();
  if (pos >= n - 1.0) return xs.back();
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  return xs[i] + frac * (xs[i + 1] - xs[i]);
}

double empirical_cdf(const std::vector<double>& xs, double x) {
  const auto n = static_cast<double>(xs.size());
  if (x < xs.front()) return 0.0;
  if (x >= xs.back()) return 1.0;
  // Last order statistic <= x; ties resolve to the right-most copy.
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double lo = xs[i];
  const double hi = xs[i + 1];
  const double frac = hi > lo ? (x - lo) / (hi - lo) : 0.0;
  return (static_cast<double>(i) + 0.5 + frac) / n;
}

Matrix lower_cholesky(const SpdMatrix& s) {
  Eigen::LLT<Matrix> llt(s.matrix());
  if (llt.info() != Eigen::Success) throw SpectrumError("Cholesky factorization failed");
  return llt.matrixL();
}

}  // namespace

GaussianParams::GaussianParams(Vector m, SpdMatrix c) : mean(std::move(m)), cov(std::move(c)) {
  require_finite(mean, "mean");
  if (mean.size() != cov.dim()) throw DimensionMismatch("mean and covariance dimensions differ");
}

Generator Generator::student_t(double nu) {
  if (!(nu > 2.0) || !std::isfinite(nu)) {
    throw InvalidArgument("student_t generator requires nu > 2 for finite covariance");
  }
  return {Kind::student_t, nu};
}

EllipticalParams::EllipticalParams(Vector loc, SpdMatrix disp, Generator gen)
    : location(std::move(loc)), dispersion(std::move(disp)), generator(gen) {
  require_finite(location, "location");
  if (location.size() != dispersion.dim()) {
    throw DimensionMismatch("location and dispersion dimensions differ");
  }
  if (generator.kind == Generator::Kind::student_t && !(generator.nu > 2.0)) {
    throw InvalidArgument("student_t generator requires nu > 2 for finite covariance");
  }
}

WishartParams::WishartParams(SpdMatrix s, double p) : scale(std::move(s)), dof(p) {
  if (!std::isfinite(dof) || dof < static_cast<double>(scale.dim())) {
    std::ostringstream os;
    os << "Wishart degrees of freedom p=" << dof << " must be >= dimension d=" << scale.dim();
    throw InvalidArgument(os.str());
  }
}

// ---------------------------------------------------------------------------

Marginal1D Marginal1D::exponential(double rate) {
  require_positive(rate, "exponential rate");
  return Marginal1D(Exponential{rate});
}

Marginal1D Marginal1D::normal(double mean, double sd) {
  if (!std::isfinite(mean)) throw InvalidArgument("normal mean must be finite");
  require_positive(sd, "normal sd");
  return Marginal1D(Normal{mean, sd});
}

Marginal1D Marginal1D::lognormal(double mu, double sigma) {
  if (!std::isfinite(mu)) throw InvalidArgument("lognormal mu must be finite");
  require_positive(sigma, "lognormal sigma");
  return Marginal1D(LogNormal{mu, sigma});
}

Marginal1D Marginal1D::weibull(double shape, double scale) {
  require_positive(shape, "weibull shape");
  require_positive(scale, "weibull scale");
  return Marginal1D(Weibull{shape, scale});
}

Marginal1D Marginal1D::pareto(double alpha, double xm) {
  if (!(alpha > 2.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("pareto alpha must exceed 2 for a finite second moment");
  }
  require_positive(xm, "pareto x_m");
  return Marginal1D(Pareto{alpha, xm});
}

Marginal1D Marginal1D::empirical(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("empirical marginal needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("empirical marginal has non-finite values");
  }
  std::sort(values.begin(), values.end());
  return Marginal1D(Empirical{std::move(values)});
}

std::string Marginal1D::name() const {
  return std::visit(overloaded{[](const Exponential&) { return std::string("exponential"); },
                               [](const Normal&) { return std::string("normal"); },
                               [](const LogNormal&) { return std::string("lognormal"); },
                               [](const Weibull&) { return std::string("weibull"); },
                               [](const Pareto&) { return std::string("pareto"); },
                               [](const Empirical&) { return std::string("empirical"); }},
                    law_);
}

double Marginal1D::quantile(double t) const {
  if (!(t > 0.0 && t < 1.0)) {
    std::ostringstream os;
    os << "quantile level " << t << " is outside (0,1)";
    throw DomainError(os.str());
  }
  return std::visit(
      overloaded{
          [t](const Exponential& e) { return -std::log1p(-t) / e.rate; },
          [t](const Normal& n) {
            return boost::math::quantile(boost::math::normal(n.mean, n.sd), t);
          },
          [t](const LogNormal& l) {
            return boost::math::quantile(boost::math::lognormal(l.mu, l.sigma), t);
          },
          [t](const Weibull& w) { return w.scale * std::pow(-std::log1p(-t), 1.0 / w.shape); },
          [t](const Pareto& p) { return p.xm * std::exp(-std::log1p(-t) / p.alpha); },
          [t](const Empirical& e) { return empirical_quantile(e.sorted, t); }},
      law_);
}

double Marginal1D::upper_quantile(double s) const {
  if (!(s > 0.0 && s < 1.0)) {
    std::ostringstream os;
    os << "upper quantile level " << s << " is outside (0,1)";
    throw DomainError(os.str());
  }
  namespace bm = boost::math;
  return std::visit(
      overloaded{
          [s](const Exponential& e) { return -std::log(s) / e.rate; },
          [s](const Normal& n) { return bm::quantile(bm::complement(bm::normal(n.mean, n.sd), s)); },
          [s](const LogNormal& l) {
            return bm::quantile(bm::complement(bm::lognormal(l.mu, l.sigma), s));
          },
          [s](const Weibull& w) { return w.scale * std::pow(-std::log(s), 1.0 / w.shape); },
          [s](const Pareto& p) { return p.xm * std::pow(s, -1.0 / p.alpha); },
          [s](const Empirical& e) { return empirical_quantile(e.sorted, 1.0 - s); }},
      law_);
}

double Marginal1D::cdf(double x) const {
  namespace bm = boost::math;
  return std::visit(
      overloaded{
          [x](const Exponential& e) { return x > 0.0 ? -std::expm1(-e.rate * x) : 0.0; },
          [x](const Normal& n) { return bm::cdf(bm::normal(n.mean, n.sd), x); },
          [x](const LogNormal& l) {
            return x > 0.0 ? bm::cdf(bm::lognormal(l.mu, l.sigma), x) : 0.0;
          },
          [x](const Weibull& w) {
            return x > 0.0 ? -std::expm1(-std::pow(x / w.scale, w.shape)) : 0.0;
          },
          [x](const Pareto& p) { return x > p.xm ? -std::expm1(p.alpha * std::log(p.xm / x)) : 0.0; },
          [x](const Empirical& e) { return empirical_cdf(e.sorted, x); }},
      law_);
}

double Marginal1D::ccdf(double x) const {
  namespace bm = boost::math;
  return std::visit(
      overloaded{
          [x](const Exponential& e) { return x > 0.0 ? std::exp(-e.rate * x) : 1.0; },
          [x](const Normal& n) { return bm::cdf(bm::complement(bm::normal(n.mean, n.sd), x)); },
          [x](const LogNormal& l) {
            return x > 0.0 ? bm::cdf(bm::complement(bm::lognormal(l.mu, l.sigma), x)) : 1.0;
          },
          [x](const Weibull& w) { return x > 0.0 ? std::exp(-std::pow(x / w.scale, w.shape)) : 1.0; },
          [x](const Pareto& p) { return x > p.xm ? std::pow(p.xm / x, p.alpha) : 1.0; },
          [x](const Empirical& e) { return 1.0 - empirical_cdf(e.sorted, x); }},
      law_);
}

double Marginal1D::draw(Engine& rng) const { return quantile(uniform_open(rng)); }

std::vector<double> Marginal1D::sample(std::size_t n, std::uint64_t seed) const {
  Engine rng = make_engine(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = draw(rng);
  return out;
}

double quantile(const Marginal1D& m, double t) { return m.quantile(t); }

Product1D::Product1D(std::vector<Marginal1D> ms) : marginals(std::move(ms)) {
  if (marginals.empty()) throw InvalidArgument("product distribution needs at least one marginal");
}

Family family_of(const DistributionSpec& spec) {
  return std::visit(overloaded{[](const GaussianParams&) { return Family::gaussian; },
                               [](const EllipticalParams&) { return Family::elliptical; },
                               [](const WishartParams&) { return Family::wishart; },
                               [](const Product1D&) { return Family::product1d; },
                               [](const Marginal1D&) { return Family::quantile1d; }},
                    spec);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::elliptical: return "elliptical";
    case Family::wishart: return "wishart";
    case Family::product1d: return "product1d";
    case Family::quantile1d: return "quantile1d";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (Family f : {Family::gaussian, Family::elliptical, Family::wishart, Family::product1d,
                   Family::quantile1d}) {
    if (to_string(f) == name) return f;
  }
  throw InvalidArgument("unknown family '" + name + "'");
}

int sample_dim(const DistributionSpec& spec) {
  return std::visit(overloaded{[](const GaussianParams& p) { return p.dim(); },
                               [](const EllipticalParams& p) { return p.dim(); },
                               [](const WishartParams& p) { return p.dim() * (p.dim() + 1) / 2; },
                               [](const Product1D& p) { return p.dim(); },
                               [](const Marginal1D&) { return 1; }},
                    spec);
}

// ---------------------------------------------------------------------------

Matrix sample_gaussian(const GaussianParams& p, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  const int d = p.dim();
  const Matrix root = psd_sqrt(p.cov).matrix();
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  Matrix z(d, static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (int i = 0; i < d; ++i) z(i, j) = normal(rng);
  Matrix x = (root * z).colwise() + p.mean;
  return x.transpose();
}

Matrix sample_elliptical(const EllipticalParams& p, std::size_t n, std::uint64_t seed) {
  if (p.generator.kind == Generator::Kind::gaussian) {
    return sample_gaussian(GaussianParams(p.location, p.dispersion), n, seed);
  }
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  const int d = p.dim();
  const double nu = p.generator.nu;
  const Matrix root = psd_sqrt(p.dispersion).matrix();
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(nu);
  Matrix out(static_cast<Eigen::Index>(n), d);
  Vector z(d);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (int i = 0; i < d; ++i) z(i) = normal(rng);
    const double w = chi2(rng);
    // t_nu has covariance nu/(nu-2); the factor sqrt((nu-2)/w) gives unit covariance.
    out.row(r) = (p.location + std::sqrt((nu - 2.0) / w) * (root * z)).transpose();
  }
  return out;
}

std::vector<Matrix> sample_wishart(const WishartParams& p, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  const int d = p.dim();
  const Matrix l = lower_cholesky(p.scale);
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  std::vector<std::chi_squared_distribution<double>> chi;
  for (int i = 0; i < d; ++i) chi.emplace_back(p.dof - i);

  std::vector<Matrix> out;
  out.reserve(n);
  Matrix a = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < n; ++k) {
    for (int i = 0; i < d; ++i) {
      a(i, i) = std::sqrt(chi[i](rng));
      for (int j = 0; j < i; ++j) a(i, j) = normal(rng);
    }
    const Matrix la = l * a;
    out.push_back(symmetrize(la * la.transpose()));
  }
  return out;
}

std::vector<Matrix> sample_wishart_gram(const WishartParams& p, std::size_t n,
                                        std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  if (p.dof != std::floor(p.dof)) {
    throw InvalidArgument("Gram Wishart construction needs integer degrees of freedom");
  }
  const int d = p.dim();
  const auto rows = static_cast<Eigen::Index>(p.dof);
  const Matrix l = lower_cholesky(p.scale);
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  std::vector<Matrix> out;
  out.reserve(n);
  Matrix z(rows, d);
  for (std::size_t k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < rows; ++i)
      for (int j = 0; j < d; ++j) z(i, j) = normal(rng);
    const Matrix zl = z * l.transpose();
    out.push_back(symmetrize(zl.transpose() * zl));
  }
  return out;
}

Matrix sample_product(const Product1D& p, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  Matrix out(static_cast<Eigen::Index>(n), p.dim());
  // One independent stream per coordinate so adding a coordinate leaves the
  // others untouched.
  for (int j = 0; j < p.dim(); ++j) {
    const auto col = p.marginals[j].sample(n, derive_seed(seed, static_cast<std::uint64_t>(j)));
    for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i), j) = col[i];
  }
  return out;
}

Matrix sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  return std::visit(
      overloaded{[&](const GaussianParams& p) { return sample_gaussian(p, n, seed); },
                 [&](const EllipticalParams& p) { return sample_elliptical(p, n, seed); },
                 [&](const WishartParams& p) {
                   const auto xs = sample_wishart(p, n, seed);
                   Matrix out(static_cast<Eigen::Index>(n), sample_dim(spec));
                   for (std::size_t i = 0; i < n; ++i) {
                     out.row(static_cast<Eigen::Index>(i)) = half_vectorize(xs[i]).transpose();
                   }
                   return out;
                 },
                 [&](const Product1D& p) { return sample_product(p, n, seed); },
                 [&](const Marginal1D& m) {
                   if (n < 1) throw InvalidArgument("sample size must be >= 1");
                   const auto xs = m.sample(n, seed);
                   return Matrix(Eigen::Map<const Matrix>(xs.data(), static_cast<Eigen::Index>(n), 1));
                 }},
      spec);
}

}  // namespace orbitot
