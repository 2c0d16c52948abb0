#include "orbitot/group.hpp"

#include <cmath>
#include <sstream>

#include "orbitot/errors.hpp"

namespace orbitot {

namespace {

void require_invertible(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + " must be a non-empty square matrix");
  }
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
  const double det = m.determinant();
  if (!(std::abs(det) > kMinAbsDeterminant)) {
    std::ostringstream os;
    os << what << " is not invertible (|det| = " << std::abs(det) << ")";
    throw InvalidArgument(os.str());
  }
}

const Exponential& as_exponential(const Marginal1D& m) {
  const auto* e = std::get_if<Exponential>(&m.law());
  if (e == nullptr) {
    throw InvalidArgument("diagonal scaling orbit requires exponential marginals, got " +
                          m.name());
  }
  return *e;
}

}  // namespace

AffineElement make_affine(Vector shift, Matrix linear) {
  require_invertible(linear, "affine linear part");
  if (shift.size() != linear.rows()) throw DimensionMismatch("affine shift dimension mismatch");
  if (!shift.allFinite()) throw InvalidArgument("affine shift has non-finite entries");
  return {std::move(shift), std::move(linear)};
}

CongruenceElement make_congruence(Matrix g) {
  require_invertible(g, "congruence matrix");
  return {std::move(g)};
}

DiagScaleElement make_diag_scale(Vector beta) {
  if (beta.size() == 0) throw InvalidArgument("diagonal scale needs at least one entry");
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (!(beta(i) > 0.0) || !std::isfinite(beta(i))) {
      throw InvalidArgument("diagonal scale entries must be positive and finite");
    }
  }
  return {std::move(beta)};
}

AffineElement compose(const AffineElement& f, const AffineElement& g) {
  return {f.shift + f.linear * g.shift, f.linear * g.linear};
}

CongruenceElement compose(const CongruenceElement& f, const CongruenceElement& g) {
  return {f.g * g.g};
}

DiagScaleElement compose(const DiagScaleElement& f, const DiagScaleElement& g) {
  return {f.beta.cwiseProduct(g.beta)};
}

AffineElement inverse(const AffineElement& f) {
  const Matrix inv = f.linear.inverse();
  return {-inv * f.shift, inv};
}

CongruenceElement inverse(const CongruenceElement& f) { return {f.g.inverse()}; }

DiagScaleElement inverse(const DiagScaleElement& f) { return {f.beta.cwiseInverse()}; }

Vector act(const AffineElement& f, const Vector& z) { return f.shift + f.linear * z; }

Matrix act(const CongruenceElement& f, const Matrix& x) { return f.g * x * f.g.transpose(); }

Vector act(const DiagScaleElement& f, const Vector& z) { return f.beta.cwiseProduct(z); }

double act(const Monotone1DElement& f, double z) {
  // Route through the upper tail for z > 0 to keep precision there.
  if (z <= 0.0) {
    const double t = logistic_cdf(z);
    return f.marginal.quantile(std::max(t, std::numeric_limits<double>::min()));
  }
  const double s = logistic_cdf(-z);
  return f.marginal.upper_quantile(std::max(s, std::numeric_limits<double>::min()));
}

GaussianParams push_forward(const AffineElement& f, const GaussianParams& mu) {
  if (f.linear.cols() != mu.dim()) throw DimensionMismatch("affine element dimension mismatch");
  return GaussianParams(act(f, mu.mean), SpdMatrix(symmetrize(f.linear * mu.cov.matrix() *
                                                              f.linear.transpose())));
}

WishartParams push_forward(const CongruenceElement& f, const WishartParams& mu) {
  if (f.g.cols() != mu.dim()) throw DimensionMismatch("congruence element dimension mismatch");
  return WishartParams(SpdMatrix(symmetrize(act(f, mu.scale.matrix()))), mu.dof);
}

Product1D push_forward(const DiagScaleElement& f, const Product1D& mu) {
  if (f.beta.size() != mu.dim()) throw DimensionMismatch("diagonal scale dimension mismatch");
  std::vector<Marginal1D> out;
  out.reserve(mu.marginals.size());
  for (int i = 0; i < mu.dim(); ++i) {
    // β·X with X ~ Exp(r) is Exp(r/β).
    out.push_back(Marginal1D::exponential(as_exponential(mu.marginals[i]).rate / f.beta(i)));
  }
  return Product1D(std::move(out));
}

AffineElement orbit_element(const GaussianParams& mu) {
  return {mu.mean, psd_sqrt(mu.cov).matrix()};
}

CongruenceElement orbit_element(const WishartParams& mu) { return {psd_sqrt(mu.scale).matrix()}; }

DiagScaleElement orbit_element(const Product1D& mu) {
  Vector beta(mu.dim());
  for (int i = 0; i < mu.dim(); ++i) beta(i) = 1.0 / as_exponential(mu.marginals[i]).rate;
  return {beta};
}

Monotone1DElement orbit_element(const Marginal1D& mu) { return {mu}; }

GaussianParams standard_gaussian(int dim) {
  return GaussianParams(Vector::Zero(dim), SpdMatrix::identity(dim));
}

WishartParams reference_wishart(int dim, double dof) {
  return WishartParams(SpdMatrix::identity(dim), dof);
}

Product1D unit_exponentials(int dim) {
  if (dim < 1) throw InvalidArgument("dimension must be >= 1");
  return Product1D(std::vector<Marginal1D>(static_cast<std::size_t>(dim),
                                           Marginal1D::exponential(1.0)));
}

double logistic_cdf(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double logistic_quantile(double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("logistic quantile level outside (0,1)");
  return std::log(t) - std::log1p(-t);
}

bool in_stabilizer(const AffineElement& f, double tol) {
  return f.shift.cwiseAbs().maxCoeff() <= tol && orthogonality_residual(f.linear) <= tol;
}

bool in_stabilizer(const CongruenceElement& f, double tol) {
  return orthogonality_residual(f.g) <= tol;
}

}  // namespace orbitot
