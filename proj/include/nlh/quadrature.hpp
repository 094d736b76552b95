#pragma once

#include <vector>

#include "nlh/common.hpp"

namespace nlh {

/// Quadrature on the reference triangle {(x, y) : x, y >= 0, x + y <= 1} or on
/// the unit interval. For interval rules only `Point::x` is used.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int order = 0;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre rule with `n` points on [0, 1]; exact to degree 2n - 1.
QuadratureRule gauss_legendre(int n);

/// Rule on the unit interval exact for polynomials of degree <= order.
QuadratureRule edge_quadrature(int order);

/// Collapsed (Duffy) Gauss rule on the reference triangle, exact for all
/// monomials x^a y^b with a + b <= order. Supported orders: 1..20.
QuadratureRule triangle_quadrature(int order);

}  // namespace nlh
