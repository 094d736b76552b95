#include "nlh/quadrature.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace nlh {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ArgumentError("gauss_legendre: need at least one point");
  // Returns (P_n(x), P_n'(x)) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  QuadratureRule rule;
  rule.order = 2 * n - 1;
  rule.points.resize(n);
  rule.weights.resize(n);
  // Nodes are symmetric; only half are computed by Newton iteration.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // [-1, 1] -> [0, 1]
    rule.points[i] = {0.5 * (1.0 - x), 0.0};
    rule.points[n - 1 - i] = {0.5 * (1.0 + x), 0.0};
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

QuadratureRule edge_quadrature(int order) {
  if (order < 0) throw ArgumentError("edge_quadrature: negative order");
  QuadratureRule rule = gauss_legendre(std::max(1, (order + 2) / 2));
  rule.order = order;
  return rule;
}

QuadratureRule triangle_quadrature(int order) {
  if (order < 1 || order > 20) {
    throw ArgumentError("triangle_quadrature: unsupported order " + std::to_string(order));
  }
  // (s, t) in [0,1]^2 -> (s (1 - t), t) with Jacobian (1 - t). A monomial of
  // total degree <= order becomes degree <= order in s and <= order + 1 in t.
  const QuadratureRule gs = gauss_legendre((order + 2) / 2);
  const QuadratureRule gt = gauss_legendre((order + 3) / 2);
  QuadratureRule rule;
  rule.order = order;
  for (std::size_t j = 0; j < gt.size(); ++j) {
    const double t = gt.points[j].x;
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const double s = gs.points[i].x;
      rule.points.push_back({s * (1.0 - t), t});
      rule.weights.push_back(gs.weights[i] * gt.weights[j] * (1.0 - t));
    }
  }
  return rule;
}

}  // namespace nlh
