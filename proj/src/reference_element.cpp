#include "nlh/reference_element.hpp"

#include <string>

namespace nlh {

namespace {

constexpr std::array<Point, 3> kVertices{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};

// Gradients of the barycentric coordinates (1 - x - y, x, y).
constexpr std::array<Point, 3> kBaryGrad{{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};

std::array<double, 3> barycentric(Point xi) { return {1.0 - xi.x - xi.y, xi.x, xi.y}; }

// Value and derivative of prod_{m<a} (p*l - m) / (m + 1).
std::pair<double, double> factor(int a, int p, double l) {
  double val = 1.0, der = 0.0;
  for (int m = 0; m < a; ++m) {
    const double f = (p * l - m) / (m + 1.0);
    const double df = p / (m + 1.0);
    der = der * f + val * df;
    val *= f;
  }
  return {val, der};
}

}  // namespace

LagrangeElement::LagrangeElement(int degree) : degree_(degree) {
  if (degree < 1 || degree > 8) {
    throw ArgumentError("LagrangeElement: unsupported degree " + std::to_string(degree));
  }
  const int p = degree;
  for (const Point v : kVertices) nodes_.push_back(v);
  for (int e = 0; e < 3; ++e) {
    const Point a = kVertices[e];
    const Point b = kVertices[(e + 1) % 3];
    for (int j = 1; j < p; ++j) nodes_.push_back((1.0 - double(j) / p) * a + (double(j) / p) * b);
  }
  for (int j = 1; j < p; ++j) {
    for (int i = 1; i + j < p; ++i) nodes_.push_back({double(i) / p, double(j) / p});
  }
  for (const Point n : nodes_) {
    const int i = static_cast<int>(std::lround(n.x * p));
    const int j = static_cast<int>(std::lround(n.y * p));
    multi_index_.push_back({p - i - j, i, j});
  }
}

void LagrangeElement::values(Point xi, std::vector<double>& out) const {
  const auto l = barycentric(xi);
  out.resize(nodes_.size());
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const auto& a = multi_index_[n];
    out[n] = factor(a[0], degree_, l[0]).first * factor(a[1], degree_, l[1]).first *
             factor(a[2], degree_, l[2]).first;
  }
}

void LagrangeElement::gradients(Point xi, std::vector<Point>& out) const {
  const auto l = barycentric(xi);
  out.resize(nodes_.size());
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const auto& a = multi_index_[n];
    std::array<std::pair<double, double>, 3> f;
    for (int k = 0; k < 3; ++k) f[k] = factor(a[k], degree_, l[k]);
    Point g{};
    for (int k = 0; k < 3; ++k) {
      double d = f[k].second;
      for (int m = 0; m < 3; ++m) {
        if (m != k) d *= f[m].first;
      }
      g = g + d * kBaryGrad[k];
    }
    out[n] = g;
  }
}

Point reference_edge_point(int e, double s) {
  const Point a = kVertices[e];
  const Point b = kVertices[(e + 1) % 3];
  return (1.0 - s) * a + s * b;
}

Point reference_edge_tangent(int e) { return kVertices[(e + 1) % 3] - kVertices[e]; }

}  // namespace nlh
