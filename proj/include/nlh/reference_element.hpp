#pragma once

#include <vector>

#include "nlh/common.hpp"

namespace nlh {

/// Equispaced Lagrange element of degree p on the reference triangle with
/// vertices (0,0), (1,0), (0,1).
///
/// Local node order: the three vertices; then for each local edge e (from
/// vertex e to vertex (e+1)%3) its p-1 interior nodes in that direction; then
/// interior nodes (i/p, j/p), i, j >= 1, i + j <= p - 1, ordered by j then i.
class LagrangeElement {
 public:
  explicit LagrangeElement(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int nodes_per_edge() const { return degree_ - 1; }
  int interior_size() const { return (degree_ - 1) * (degree_ - 2) / 2; }
  const std::vector<Point>& nodes() const { return nodes_; }

  /// Local index of the j-th (0-based) interior node of local edge e.
  int edge_node(int e, int j) const { return 3 + e * (degree_ - 1) + j; }

  void values(Point xi, std::vector<double>& out) const;
  void gradients(Point xi, std::vector<Point>& out) const;

 private:
  int degree_;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> multi_index_;  // barycentric exponents (scaled by p)
};

/// Maps a parameter s in [0,1] along local edge e to reference coordinates.
Point reference_edge_point(int e, double s);

/// d(reference point)/ds along local edge e.
Point reference_edge_tangent(int e);

}  // namespace nlh
