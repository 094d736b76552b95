#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "nlh/common.hpp"
#include "nlh/reference_element.hpp"

namespace nlh {

/// Elementwise value of the nonlinearity indicator: IN_D for |x| < 0.5.
enum class Region : std::uint8_t { OutD = 0, InD = 1 };

enum class EdgeTag : std::uint8_t { Interior, Gamma, Interface };

inline constexpr double kDomainRadius = 1.0;
inline constexpr double kInterfaceRadius = 0.5;

struct Edge {
  std::array<int, 2> vertices;         // global vertex indices, vertices[0] < vertices[1]
  std::array<int, 2> triangles{-1, -1};  // owning triangles; [1] == -1 on the boundary
  std::array<int, 2> local{-1, -1};      // local edge index within each owner
  EdgeTag tag = EdgeTag::Interior;
};

/// Red-refinement link: the child's reference vertices expressed in the
/// parent's reference coordinates.
struct ParentLink {
  int triangle = -1;
  std::array<Point, 3> embedding{};

  Point to_parent(Point xi) const {
    return embedding[0] + xi.x * (embedding[1] - embedding[0]) +
           xi.y * (embedding[2] - embedding[0]);
  }
};

struct Location {
  int triangle = -1;
  Point xi;
};

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

/// Conforming triangulation of the unit disk fitted to the circle r = 0.5.
///
/// Triangles with an edge on Γ or on the interface carry a degree-q
/// isoparametric map; all others are affine. Immutable after construction.
class Mesh {
 public:
  using Triangle = std::array<int, 3>;

  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<Region> regions,
       int geometric_degree);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& boundary_edges() const { return boundary_edges_; }
  /// Edge index of local edge e (vertex e -> vertex (e+1)%3) of triangle t.
  int triangle_edge(int t, int e) const { return triangle_edges_[t][e]; }
  Region region(int t) const { return regions_[t]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int geometric_degree() const { return geometric_degree_; }
  double h() const { return h_; }

  bool is_curved(int t) const { return !curved_nodes_[t].empty(); }
  /// Geometry nodes in LagrangeElement(q) order; empty for affine triangles.
  const std::vector<Point>& curved_nodes(int t) const { return curved_nodes_[t]; }

  Point map(int t, Point xi) const;
  Mat2 jacobian(int t, Point xi) const;
  double diameter(int t) const;

  /// Finds a triangle containing x and its reference coordinates.
  /// Throws NotFoundError if x lies outside every triangle.
  Location locate_point(Point x) const;
  /// Inverse of `map` on a single triangle; nullopt if the iteration fails or
  /// the preimage falls outside the reference triangle (beyond `tol`).
  std::optional<Point> inverse_map(int t, Point x, double tol = 1e-10) const;

  // Refinement lineage.
  int refinement_depth() const { return depth_; }
  const MeshPtr& coarser() const { return coarser_; }
  const ParentLink& parent(int t) const { return parents_[t]; }

  /// Total area by volume quadrature of the given order.
  double area(int order = 12) const;

 private:
  friend MeshPtr refine(const MeshPtr& mesh);

  void build_edges();
  void build_geometry();
  void build_locator();

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Region> regions_;
  int geometric_degree_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<int> boundary_edges_;
  std::vector<std::vector<Point>> curved_nodes_;
  std::shared_ptr<const LagrangeElement> geometry_element_;
  double h_ = 0.0;

  int depth_ = 0;
  MeshPtr coarser_;
  std::vector<ParentLink> parents_;

  // Uniform bucket grid over [-1, 1]^2 used by locate_point.
  int grid_n_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Structured two-band disk template (level 2 in the level numbering below).
MeshPtr base_disk_mesh(int geometric_degree);

/// Red (1 -> 4) refinement; new midpoints of Γ / interface edges are snapped
/// onto their circles.
MeshPtr refine(const MeshPtr& mesh);

/// Lowest supported level; the base template.
inline constexpr int kBaseLevel = 2;

/// Base template refined (level - kBaseLevel) times.
MeshPtr disk_mesh_level(int level, int geometric_degree);

/// Refines the base template until h <= target_h. Throws ResourceError if the
/// result would exceed `max_triangles`.
MeshPtr build_disk_mesh(double target_h, int geometric_degree, long max_triangles = 4'000'000);

/// Plain-text dump: header `nlh-mesh 1`, `v x y`, `t i j k flag`, `c t n x0 y0 ...`.
void write_mesh(std::ostream& os, const Mesh& mesh);
MeshPtr read_mesh(std::istream& is);

}  // namespace nlh
