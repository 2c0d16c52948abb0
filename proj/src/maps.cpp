#include "orbitot/maps.hpp"

#include <limits>

#include "orbitot/detail/overloaded.hpp"
#include "orbitot/errors.hpp"

namespace orbitot {

using detail::overloaded;

double QuantileMap::operator()(double x) const {
  constexpr double tiny = std::numeric_limits<double>::min();
  const double t = source.cdf(x);
  if (t <= 0.5) return target.quantile(std::max(t, tiny));
  return target.upper_quantile(std::clamp(source.ccdf(x), tiny, 0.5));
}

std::string map_kind(const MongeMap& m) {
  return std::visit(overloaded{[](const AffineMap&) { return std::string("affine"); },
                               [](const CongruenceMap&) { return std::string("congruence"); },
                               [](const DiagMap&) { return std::string("diagonal"); },
                               [](const QuantileMap&) { return std::string("quantile"); },
                               [](const ProductQuantileMap&) {
                                 return std::string("product_quantile");
                               }},
                    m);
}

int map_input_dim(const MongeMap& m) {
  return std::visit(
      overloaded{[](const AffineMap& a) { return static_cast<int>(a.linear.cols()); },
                 [](const CongruenceMap& c) {
                   const auto d = static_cast<int>(c.t.rows());
                   return d * (d + 1) / 2;
                 },
                 [](const DiagMap& d) { return static_cast<int>(d.ratios.size()); },
                 [](const QuantileMap&) { return 1; },
                 [](const ProductQuantileMap& p) { return static_cast<int>(p.coords.size()); }},
      m);
}

Matrix apply_congruence(const CongruenceMap& m, const Matrix& x) {
  if (x.rows() != m.t.rows() || x.cols() != m.t.cols()) {
    throw DimensionMismatch("congruence map applied to a matrix of the wrong size");
  }
  return symmetrize(m.t * x * m.t.transpose());
}

Matrix apply_map(const MongeMap& m, const Matrix& rows) {
  if (rows.cols() != map_input_dim(m)) {
    throw DimensionMismatch("apply_map: sample rows have " + std::to_string(rows.cols()) +
                            " columns, map expects " + std::to_string(map_input_dim(m)));
  }
  return std::visit(
      overloaded{
          [&](const AffineMap& a) -> Matrix {
            return ((rows * a.linear.transpose()).rowwise() + a.shift.transpose()).eval();
          },
          [&](const CongruenceMap& c) -> Matrix {
            const int d = static_cast<int>(c.t.rows());
            Matrix out(rows.rows(), rows.cols());
            for (Eigen::Index i = 0; i < rows.rows(); ++i) {
              const Matrix x = half_unvectorize(rows.row(i).transpose(), d);
              out.row(i) = half_vectorize(apply_congruence(c, x)).transpose();
            }
            return out;
          },
          [&](const DiagMap& dm) -> Matrix { return rows * dm.ratios.asDiagonal(); },
          [&](const QuantileMap& q) -> Matrix { return rows.unaryExpr(q); },
          [&](const ProductQuantileMap& p) -> Matrix {
            Matrix out(rows.rows(), rows.cols());
            for (Eigen::Index j = 0; j < rows.cols(); ++j) {
              out.col(j) = rows.col(j).unaryExpr(p.coords[static_cast<std::size_t>(j)]);
            }
            return out;
          }},
      m);
}

Vector apply_map(const MongeMap& m, const Vector& point) {
  return apply_map(m, Matrix(point.transpose())).row(0).transpose();
}

}  // namespace orbitot
