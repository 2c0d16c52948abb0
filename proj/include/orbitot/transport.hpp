#pragma once

// Closed-form quadratic-cost transport between laws on a common group orbit.
//
// Each family has a reference law ρ and orbit representatives g₀, g₁ with
// gᵢ#ρ = μᵢ. The transport cost is bounded above by the reduced objective
// Ψ(h) = E_ρ‖g₀(z) − g₁(h(z))‖² over h in the stabilizer of ρ; the optimal
// map is g₁ ∘ h★ ∘ g₀⁻¹, and the bound is tight when that map passes the
// certificate in certificates.hpp.

#include <optional>
#include <vector>

#include "orbitot/certificates.hpp"
#include "orbitot/distributions.hpp"
#include "orbitot/maps.hpp"

namespace orbitot {

struct TransportSolution {
  double cost = 0.0;
  MongeMap map;
  Family family = Family::gaussian;
  CertificateReport certificate;
};

// ---------------------------------------------------------------------------
// Gaussian (affine orbit of N(0, I); stabilizer O(d))

/// ‖m₀−m₁‖² + Tr(Σ₀ + Σ₁ − 2(Σ₁^{1/2} Σ₀ Σ₁^{1/2})^{1/2}).
double gaussian_cost(const GaussianParams& a, const GaussianParams& b);

/// x ↦ m₁ + T(x − m₀) with T = Σ₀^{-1/2}(Σ₀^{1/2} Σ₁ Σ₀^{1/2})^{1/2} Σ₀^{-1/2}.
AffineMap gaussian_map(const GaussianParams& a, const GaussianParams& b);

/// Reduced objective Ψ(Q) = ‖m₀−m₁‖² + Tr(Σ₀+Σ₁) − 2 Tr(Σ₁^{1/2} Q Σ₀^{1/2}).
/// Throws InvalidArgument if q is not orthogonal within tol::kOrthogonal.
double gaussian_psi(const GaussianParams& a, const GaussianParams& b, const Matrix& q);

/// Q★ = trace_align(Σ₀^{1/2} Σ₁^{1/2}), the minimizer of gaussian_psi.
Matrix gaussian_optimal_rotation(const GaussianParams& a, const GaussianParams& b);

/// The optimal map assembled as g₁ ∘ h★ ∘ g₀⁻¹ from group elements, i.e.
/// linear part Σ₁^{1/2} Q★ Σ₀^{-1/2}. Independent of gaussian_map's formula.
AffineMap gaussian_map_via_group(const GaussianParams& a, const GaussianParams& b);

/// gaussian_cost with Σᵢ + εI, for covariances that may be singular.
double regularized_gaussian_cost(const Vector& m0, const Matrix& cov0, const Vector& m1,
                                 const Matrix& cov1, double eps);

/// The Gaussian cost formula on PSD covariances, evaluated with principal
/// roots whose negative round-off eigenvalues are clamped to zero. This is the
/// ε ↓ 0 limit of regularized_gaussian_cost.
double psd_gaussian_cost(const Vector& m0, const Matrix& cov0, const Vector& m1,
                         const Matrix& cov1);

// Elliptical laws share the Gaussian cost and map in (location, dispersion).
// Both laws must use the same generator.
double elliptical_cost(const EllipticalParams& a, const EllipticalParams& b);
AffineMap elliptical_map(const EllipticalParams& a, const EllipticalParams& b);

/// Σ₀^{-1/2}(Σ₀^{1/2} Σ₁ Σ₀^{1/2})^{1/2} Σ₀^{-1/2}, symmetric by construction.
Matrix bures_transport_matrix(const SpdMatrix& s0, const SpdMatrix& s1);

// ---------------------------------------------------------------------------
// Wishart (congruence orbit of W_d(I, p); stabilizer O(d)); squared Frobenius cost

/// p(Tr(Σ₀)² + Tr(Σ₁)² − 2Tr(Λ)² − 2Tr(Λ²)) − 2p²Tr(Σ₀Σ₁) + p(p+1)(Tr(Σ₀²) + Tr(Σ₁²)),
/// Λ = singular values of Σ₀^{1/2} Σ₁^{1/2}. Both laws must share p.
double wishart_cost(const WishartParams& a, const WishartParams& b);

/// X ↦ T X T with the same T as the Gaussian map.
CongruenceMap wishart_map(const WishartParams& a, const WishartParams& b);

/// E_{X∼W_d(I,p)}[Tr(U X V X)] = p Tr(U) Tr(V) + p Tr(U Vᵀ) + p² Tr(U V).
double wishart_moment(const Matrix& u, const Matrix& v, double p, int d);

/// Reduced objective E_ρ‖Σ₀^{1/2} X Σ₀^{1/2} − Σ₁^{1/2} Q X Qᵀ Σ₁^{1/2}‖²_F, exact.
double wishart_psi(const WishartParams& a, const WishartParams& b, const Matrix& q);

Matrix wishart_optimal_rotation(const WishartParams& a, const WishartParams& b);

// ---------------------------------------------------------------------------
// Products of one-dimensional laws and the 1-D quantile transport

/// 2 Σ (1/β₀ᵢ − 1/β₁ᵢ)² for products of exponentials with rates β.
double exponential_product_cost(const Vector& rates0, const Vector& rates1);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  /// Extrapolated integral over the excluded end intervals (0, ε) and (1−ε, 1).
  double tail_estimate = 0.0;
};

inline constexpr double kQuantileEdge = 1e-300;

/// ∫₀¹ (F_b⁻¹(t) − F_a⁻¹(t))² dt by adaptive Gauss-Kronrod on (ε, 1−ε), each
/// half integrated in the variable −ln t (resp. −ln(1−t)). Throws
/// QuadratureError when error plus tail exceeds max(1e-8, 1e-6·value).
QuadratureResult quantile_cost_detailed(const Marginal1D& a, const Marginal1D& b);
double quantile_cost(const Marginal1D& a, const Marginal1D& b);

QuantileMap quantile_map(const Marginal1D& a, const Marginal1D& b);

/// Σᵢ of the per-coordinate costs; exponential pairs use the closed form.
double product1d_cost(const Product1D& a, const Product1D& b);

/// DiagMap when every coordinate pair is a same-shape scale pair, else a
/// coordinate-wise ProductQuantileMap.
MongeMap product1d_map(const Product1D& a, const Product1D& b);

/// Scale ratio r with x ↦ r·x pushing a onto b, when a and b belong to the
/// same scale family with equal shape.
std::optional<double> scale_ratio(const Marginal1D& a, const Marginal1D& b);

// ---------------------------------------------------------------------------

/// Cost, map and certificate for two laws of the same family.
TransportSolution solve(const DistributionSpec& a, const DistributionSpec& b);

double transport_cost(const DistributionSpec& a, const DistributionSpec& b);
MongeMap transport_map(const DistributionSpec& a, const DistributionSpec& b);

}  // namespace orbitot
