#pragma once

// Dense symmetric/general matrix kernels: PSD functions through symmetric
// eigendecomposition, SVD, trace-optimal orthogonal alignment and Haar
// sampling on O(d).

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace orbitot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tol {
inline constexpr double kSymmetry = 1e-12;     // relative asymmetry accepted on construction
inline constexpr double kSpdFloor = 1e-10;     // min eigenvalue must exceed this times the max
inline constexpr double kIdentity = 1e-9;      // algebraic identities
inline constexpr double kOrthogonal = 1e-8;    // orthogonality accepted for user-supplied Q
inline constexpr double kCondWarn = 1e8;
inline constexpr double kCondFail = 1e12;
}  // namespace tol

/// Symmetric positive-definite matrix with a cached eigendecomposition.
///
/// Construction symmetrizes the input, then rejects it if the relative
/// asymmetry exceeded tol::kSymmetry, if any entry is non-finite, or if the
/// smallest eigenvalue is not above `floor_rel` times the largest.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& m, double floor_rel = tol::kSpdFloor);

  static SpdMatrix identity(int dim);
  static SpdMatrix diagonal(const Vector& diag);

  /// Builds V·diag(evals)·Vᵀ from a known orthonormal eigenbasis. evals must
  /// be ascending and positive.
  static SpdMatrix from_spectrum(const Vector& evals, const Matrix& evecs);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  operator const Matrix&() const { return m_; }

  /// Ascending eigenvalues and matching orthonormal eigenvectors (columns).
  const Vector& eigenvalues() const { return evals_; }
  const Matrix& eigenvectors() const { return evecs_; }

  double min_eigenvalue() const { return evals_(0); }
  double max_eigenvalue() const { return evals_(evals_.size() - 1); }
  double condition_number() const { return max_eigenvalue() / min_eigenvalue(); }
  double trace() const { return m_.trace(); }

 private:
  SpdMatrix(Matrix m, Vector evals, Matrix evecs);

  Matrix m_;
  Vector evals_;
  Matrix evecs_;
};

struct SvdTriple {
  Matrix u;
  Vector sigma;  // nonincreasing
  Matrix vt;
};

/// Returns (m + mᵀ)/2.
Matrix symmetrize(const Matrix& m);

/// Largest absolute entry of m - mᵀ relative to the largest absolute entry of m.
double relative_asymmetry(const Matrix& m);

/// ‖a - b‖_F / ‖b‖_F (falls back to the absolute error when b = 0).
double relative_frobenius_error(const Matrix& a, const Matrix& b);

/// Largest absolute entry of qᵀq - I.
double orthogonality_residual(const Matrix& q);

bool all_finite(const Matrix& m);

/// Principal square root. Eigenvalues below the SPD floor are clamped to it.
SpdMatrix psd_sqrt(const SpdMatrix& a);

/// Inverse principal square root. Throws IllConditioned above tol::kCondFail.
SpdMatrix psd_inv_sqrt(const SpdMatrix& a);

/// Principal square root of a symmetric PSD matrix given as a raw matrix,
/// eigenvalues clamped below at `floor_abs` (0 allowed). Used on the
/// boundary of the cone where SpdMatrix construction would refuse.
Matrix psd_sqrt_clamped(const Matrix& a, double floor_abs = 0.0);

/// Non-empty message when the condition number exceeds tol::kCondWarn.
std::optional<std::string> condition_warning(const SpdMatrix& a, const std::string& what);

SvdTriple svd(const Matrix& a);

/// Q★ = V Uᵀ for m = U Σ Vᵀ, the orthogonal Q maximizing Tr(m Q).
Matrix trace_align(const Matrix& m);

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of R's diagonal moved into Q.
Matrix haar_orthogonal(int dim, std::uint64_t seed);

/// Half-vectorization of a symmetric matrix with off-diagonal entries
/// weighted by √2, so Euclidean distance equals Frobenius distance.
Vector half_vectorize(const Matrix& m);
Matrix half_unvectorize(const Vector& v, int dim);

/// Dimension d such that d(d+1)/2 == len, or -1.
int half_vector_dim(Eigen::Index len);

}  // namespace orbitot
