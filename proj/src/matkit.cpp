#include "orbitot/matkit.hpp"

#include <cmath>
#include <sstream>

#include "orbitot/errors.hpp"
#include "orbitot/random.hpp"

namespace orbitot {

namespace {

struct Eigensystem {
  Vector values;
  Matrix vectors;
};

Eigensystem symmetric_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw SpectrumError("symmetric eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix rebuild(const Vector& values, const Matrix& vectors) {
  return symmetrize(vectors * values.asDiagonal() * vectors.transpose());
}

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double relative_asymmetry(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

double relative_frobenius_error(const Matrix& a, const Matrix& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

double orthogonality_residual(const Matrix& q) {
  const Matrix gram = q.transpose() * q;
  return (gram - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

SpdMatrix::SpdMatrix(Matrix m, Vector evals, Matrix evecs)
    : m_(std::move(m)), evals_(std::move(evals)), evecs_(std::move(evecs)) {}

SpdMatrix::SpdMatrix(const Matrix& m, double floor_rel) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DimensionMismatch("SpdMatrix requires a non-empty square matrix");
  }
  if (!m.allFinite()) throw InvalidArgument("SpdMatrix has non-finite entries");
  if (relative_asymmetry(m) > tol::kSymmetry) {
    std::ostringstream os;
    os << "matrix is not symmetric (relative asymmetry " << relative_asymmetry(m) << ")";
    throw InvalidArgument(os.str());
  }
  m_ = symmetrize(m);
  auto eig = symmetric_eigen(m_);
  evals_ = std::move(eig.values);
  evecs_ = std::move(eig.vectors);
  const double top = evals_(evals_.size() - 1);
  const double bottom = evals_(0);
  if (!(top > 0.0) || !(bottom > floor_rel * top)) {
    std::ostringstream os;
    os << "matrix is not positive definite: min eigenvalue " << bottom << ", max eigenvalue "
       << top << " (floor " << floor_rel << " x max)";
    throw SpectrumError(os.str());
  }
}

SpdMatrix SpdMatrix::identity(int dim) {
  if (dim < 1) throw InvalidArgument("identity dimension must be >= 1");
  return SpdMatrix(Matrix::Identity(dim, dim), Vector::Ones(dim), Matrix::Identity(dim, dim));
}

SpdMatrix SpdMatrix::diagonal(const Vector& diag) { return SpdMatrix(Matrix(diag.asDiagonal())); }

SpdMatrix SpdMatrix::from_spectrum(const Vector& evals, const Matrix& evecs) {
  if (evals.size() == 0 || evecs.rows() != evals.size() || evecs.cols() != evals.size()) {
    throw DimensionMismatch("from_spectrum: eigenbasis shape does not match spectrum");
  }
  if (!(evals.minCoeff() > 0.0)) throw SpectrumError("from_spectrum: nonpositive eigenvalue");
  return SpdMatrix(rebuild(evals, evecs), evals, evecs);
}

SpdMatrix psd_sqrt(const SpdMatrix& a) {
  const double floor = tol::kSpdFloor * a.max_eigenvalue();
  const Vector roots = a.eigenvalues().cwiseMax(floor).cwiseSqrt();
  return SpdMatrix::from_spectrum(roots, a.eigenvectors());
}

SpdMatrix psd_inv_sqrt(const SpdMatrix& a) {
  if (a.condition_number() > tol::kCondFail) {
    std::ostringstream os;
    os << "psd_inv_sqrt: condition number " << a.condition_number() << " exceeds "
       << tol::kCondFail;
    throw IllConditioned(os.str());
  }
  const double floor = tol::kSpdFloor * a.max_eigenvalue();
  // Eigenvalues come back ascending; their inverse roots are descending.
  const Vector inv = a.eigenvalues().cwiseMax(floor).cwiseSqrt().cwiseInverse();
  return SpdMatrix::from_spectrum(inv.reverse(), a.eigenvectors().rowwise().reverse().eval());
}

Matrix psd_sqrt_clamped(const Matrix& a, double floor_abs) {
  if (a.rows() != a.cols()) throw DimensionMismatch("psd_sqrt_clamped: matrix is not square");
  const auto eig = symmetric_eigen(symmetrize(a));
  return rebuild(eig.values.cwiseMax(floor_abs).cwiseSqrt(), eig.vectors);
}

std::optional<std::string> condition_warning(const SpdMatrix& a, const std::string& what) {
  if (a.condition_number() <= tol::kCondWarn) return std::nullopt;
  std::ostringstream os;
  os << what << ": condition number " << a.condition_number() << " exceeds " << tol::kCondWarn;
  return os.str();
}

SvdTriple svd(const Matrix& a) {
  if (a.rows() == 0 || a.rows() != a.cols()) throw DimensionMismatch("svd: matrix must be square");
  if (!a.allFinite()) throw InvalidArgument("svd: non-finite entries");
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!solver.singularValues().allFinite()) throw SpectrumError("svd did not converge");
  return {solver.matrixU(), solver.singularValues(), solver.matrixV().transpose()};
}

Matrix trace_align(const Matrix& m) {
  const SvdTriple s = svd(m);
  return s.vt.transpose() * s.u.transpose();
}

Matrix haar_orthogonal(int dim, std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("haar_orthogonal: dim must be >= 1");
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  Matrix g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Vector half_vectorize(const Matrix& m) {
  const Eigen::Index d = m.rows();
  Vector v(d * (d + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    v(k++) = m(i, i);
    for (Eigen::Index j = i + 1; j < d; ++j) v(k++) = std::sqrt(2.0) * 0.5 * (m(i, j) + m(j, i));
  }
  return v;
}

Matrix half_unvectorize(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * (dim + 1) / 2) {
    throw DimensionMismatch("half_unvectorize: length does not match dimension");
  }
  Matrix m(dim, dim);
  Eigen::Index k = 0;
  for (int i = 0; i < dim; ++i) {
    m(i, i) = v(k++);
    for (int j = i + 1; j < dim; ++j) {
      m(i, j) = m(j, i) = v(k++) / std::sqrt(2.0);
    }
  }
  return m;
}

int half_vector_dim(Eigen::Index len) {
  for (int d = 1; static_cast<Eigen::Index>(d) * (d + 1) / 2 <= len; ++d) {
    if (static_cast<Eigen::Index>(d) * (d + 1) / 2 == len) return d;
  }
  return -1;
}

}  // namespace orbitot
