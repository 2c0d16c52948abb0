#pragma once

#include <cstdint>

#include "orbitot/matkit.hpp"
#include "orbitot/random.hpp"

namespace orbitot::testing {

inline Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

// A Aᵀ/d + 0.5 I, well conditioned.
inline SpdMatrix random_spd(int d, std::uint64_t seed) {
  const Matrix a = gaussian_matrix(d, d, seed);
  return SpdMatrix(a * a.transpose() / d + 0.5 * Matrix::Identity(d, d));
}

inline Vector random_vector(int d, std::uint64_t seed, double scale = 2.0) {
  return scale * gaussian_matrix(d, 1, seed).col(0);
}

inline Matrix random_symmetric(int d, std::uint64_t seed) {
  return symmetrize(gaussian_matrix(d, d, seed));
}

}  // namespace orbitot::testing
