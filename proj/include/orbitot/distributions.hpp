#pragma once

// Parameter types for every distribution family that lies in a group orbit,
// plus seeded samplers used by the validation oracles. Samplers are pure
// functions of (params, n, seed).

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "orbitot/matkit.hpp"
#include "orbitot/random.hpp"

namespace orbitot {

struct GaussianParams {
  GaussianParams(Vector mean, SpdMatrix cov);

  int dim() const { return static_cast<int>(mean.size()); }

  Vector mean;
  SpdMatrix cov;
};

/// Characteristic generator of an elliptical law. Student-t draws are scaled
/// so the covariance equals the dispersion matrix.
struct Generator {
  enum class Kind { gaussian, student_t };

  static Generator gaussian() { return {Kind::gaussian, 0.0}; }
  static Generator student_t(double nu);

  Kind kind = Kind::gaussian;
  double nu = 0.0;  // student_t only, > 2
};

struct EllipticalParams {
  EllipticalParams(Vector location, SpdMatrix dispersion, Generator generator);

  int dim() const { return static_cast<int>(location.size()); }

  Vector location;
  SpdMatrix dispersion;
  Generator generator;
};

struct WishartParams {
  /// Throws InvalidArgument when dof < dim.
  WishartParams(SpdMatrix scale, double dof);

  int dim() const { return scale.dim(); }

  SpdMatrix scale;
  double dof;
};

// ---------------------------------------------------------------------------
// One-dimensional marginals

struct Exponential {
  double rate;
};
struct Normal {
  double mean;
  double sd;
};
struct LogNormal {
  double mu;
  double sigma;
};
struct Weibull {
  double shape;
  double scale;
};
struct Pareto {
  double alpha;  // > 2 for a finite second moment
  double xm;
};
struct Empirical {
  std::vector<double> sorted;
};

/// A one-dimensional law with strictly increasing quantile on (0,1).
///
/// The empirical family interpolates linearly between order statistics placed
/// at plotting positions (i + 1/2)/n and is flat beyond the extreme ones.
class Marginal1D {
 public:
  using Law = std::variant<Exponential, Normal, LogNormal, Weibull, Pareto, Empirical>;

  static Marginal1D exponential(double rate);
  static Marginal1D normal(double mean, double sd);
  static Marginal1D lognormal(double mu, double sigma);
  static Marginal1D weibull(double shape, double scale);
  static Marginal1D pareto(double alpha, double xm);
  static Marginal1D empirical(std::vector<double> values);

  const Law& law() const { return law_; }
  std::string name() const;

  double quantile(double t) const;
  /// quantile(1 - s), evaluated without forming 1 - s where the family allows.
  double upper_quantile(double s) const;
  double cdf(double x) const;
  /// 1 - cdf(x), evaluated without cancellation where the family allows.
  double ccdf(double x) const;

  /// Draws n values with a dedicated engine seeded by `seed`.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  double draw(Engine& rng) const;

 private:
  explicit Marginal1D(Law l) : law_(std::move(l)) {}
  Law law_;
};

/// quantile(m, t) as a free function; throws DomainError outside (0,1).
double quantile(const Marginal1D& m, double t);

struct Product1D {
  explicit Product1D(std::vector<Marginal1D> marginals);

  int dim() const { return static_cast<int>(marginals.size()); }

  std::vector<Marginal1D> marginals;
};

using DistributionSpec =
    std::variant<GaussianParams, EllipticalParams, WishartParams, Product1D, Marginal1D>;

/// Orbit families handled by the library.
enum class Family { gaussian, elliptical, wishart, product1d, quantile1d };

Family family_of(const DistributionSpec& spec);
std::string to_string(Family f);
/// Throws InvalidArgument for unknown names.
Family family_from_string(const std::string& name);

/// Dimension of a sample row: d for vector laws, d(d+1)/2 for Wishart.
int sample_dim(const DistributionSpec& spec);

// ---------------------------------------------------------------------------
// Samplers. Vector-valued samples are n×d with one draw per row.

Matrix sample_gaussian(const GaussianParams& p, std::size_t n, std::uint64_t seed);
Matrix sample_elliptical(const EllipticalParams& p, std::size_t n, std::uint64_t seed);

/// Bartlett construction; valid for any real dof >= dim.
std::vector<Matrix> sample_wishart(const WishartParams& p, std::size_t n, std::uint64_t seed);

/// Gram construction ZᵀZ with Z having dof rows; dof must be an integer.
std::vector<Matrix> sample_wishart_gram(const WishartParams& p, std::size_t n,
                                        std::uint64_t seed);

Matrix sample_product(const Product1D& p, std::size_t n, std::uint64_t seed);

/// Samples of any family as an n×sample_dim matrix (Wishart draws
/// half-vectorized with √2 off-diagonal weights).
Matrix sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace orbitot
