#pragma once

// Monge maps produced by the orbit solvers and their evaluation.

#include <variant>
#include <vector>

#include "orbitot/distributions.hpp"
#include "orbitot/matkit.hpp"

namespace orbitot {

/// x ↦ shift + linear·x. For the Gaussian optimum shift = m₁ - T m₀.
struct AffineMap {
  Vector shift;
  Matrix linear;
};

/// X ↦ t X tᵀ on symmetric matrices.
struct CongruenceMap {
  Matrix t;
};

/// x ↦ ratios ⊙ x.
struct DiagMap {
  Vector ratios;
};

/// x ↦ F_target⁻¹(F_source(x)).
struct QuantileMap {
  Marginal1D source;
  Marginal1D target;

  double operator()(double x) const;
};

/// Coordinate-wise quantile maps for product laws.
struct ProductQuantileMap {
  std::vector<QuantileMap> coords;
};

using MongeMap = std::variant<AffineMap, CongruenceMap, DiagMap, QuantileMap, ProductQuantileMap>;

std::string map_kind(const MongeMap& m);

/// Length of a sample row the map accepts (d(d+1)/2 for congruence maps).
int map_input_dim(const MongeMap& m);

Matrix apply_congruence(const CongruenceMap& m, const Matrix& x);

/// Applies the map to every row. Congruence maps take half-vectorized
/// symmetric matrices (see half_vectorize) and return the same layout.
Matrix apply_map(const MongeMap& m, const Matrix& rows);

Vector apply_map(const MongeMap& m, const Vector& point);

}  // namespace orbitot
