#pragma once

// Lie-group elements acting on outcome spaces, their push-forward action on
// distribution parameters, and the orbit representatives g with g#ρ = μ.
//
//   affine      z ↦ shift + linear·z      on ℝᵈ,      ρ = N(0, I)
//   congruence  X ↦ g X gᵀ                on S₊₊ᵈ,    ρ = W_d(I, p)
//   diag scale  z ↦ beta ⊙ z              on ℝ₊ᵈ,     ρ = ⊗ Exp(1)
//   monotone    z ↦ F_μ⁻¹(F_ρ(z))         on ℝ,       ρ = standard logistic

#include <variant>

#include "orbitot/distributions.hpp"
#include "orbitot/matkit.hpp"

namespace orbitot {

inline constexpr double kMinAbsDeterminant = 1e-12;

struct AffineElement {
  Vector shift;
  Matrix linear;
};

struct CongruenceElement {
  Matrix g;
};

struct DiagScaleElement {
  Vector beta;
};

/// Represents F_μ⁻¹ ∘ F_ρ by its target marginal μ.
struct Monotone1DElement {
  Marginal1D marginal;
};

using GroupElement =
    std::variant<AffineElement, CongruenceElement, DiagScaleElement, Monotone1DElement>;

// Validated constructors (GL(d) membership, positive scales).
AffineElement make_affine(Vector shift, Matrix linear);
CongruenceElement make_congruence(Matrix g);
DiagScaleElement make_diag_scale(Vector beta);

/// f ∘ g.
AffineElement compose(const AffineElement& f, const AffineElement& g);
CongruenceElement compose(const CongruenceElement& f, const CongruenceElement& g);
DiagScaleElement compose(const DiagScaleElement& f, const DiagScaleElement& g);

AffineElement inverse(const AffineElement& f);
CongruenceElement inverse(const CongruenceElement& f);
DiagScaleElement inverse(const DiagScaleElement& f);

Vector act(const AffineElement& f, const Vector& z);
Matrix act(const CongruenceElement& f, const Matrix& x);
Vector act(const DiagScaleElement& f, const Vector& z);
double act(const Monotone1DElement& f, double z);

/// Parameters of f#μ.
GaussianParams push_forward(const AffineElement& f, const GaussianParams& mu);
WishartParams push_forward(const CongruenceElement& f, const WishartParams& mu);
/// Requires every marginal to be exponential.
Product1D push_forward(const DiagScaleElement& f, const Product1D& mu);

// Orbit representatives.
AffineElement orbit_element(const GaussianParams& mu);       // (m, Σ^{1/2})
CongruenceElement orbit_element(const WishartParams& mu);    // Σ^{1/2}
DiagScaleElement orbit_element(const Product1D& mu);         // 1/β, exponentials only
Monotone1DElement orbit_element(const Marginal1D& mu);

// Reference measures.
GaussianParams standard_gaussian(int dim);
WishartParams reference_wishart(int dim, double dof);
Product1D unit_exponentials(int dim);

double logistic_cdf(double x);
double logistic_quantile(double t);

/// True when f fixes the reference measure of its group: affine with zero
/// shift and orthogonal linear part, or orthogonal congruence.
bool in_stabilizer(const AffineElement& f, double tol = tol::kOrthogonal);
bool in_stabilizer(const CongruenceElement& f, double tol = tol::kOrthogonal);

}  // namespace orbitot
