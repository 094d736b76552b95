#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nlh/mesh.hpp"
#include "nlh/quadrature.hpp"
#include "nlh/reference_element.hpp"

namespace nlh {

/// Reference basis values/gradients tabulated at the points of a rule.
struct BasisTable {
  QuadratureRule rule;
  std::vector<std::vector<double>> values;    // [q][i]
  std::vector<std::vector<Point>> gradients;  // [q][i]
};

class FeSpace;
using SpacePtr = std::shared_ptr<const FeSpace>;

/// Continuous degree-p Lagrange space on a Mesh, mapped through each
/// triangle's geometry map.
class FeSpace {
 public:
  FeSpace(MeshPtr mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int degree() const { return element_.degree(); }
  int n_dofs() const { return n_dofs_; }
  int dofs_per_element() const { return element_.size(); }
  const LagrangeElement& element() const { return element_; }

  std::span<const int> dofs(int t) const {
    return {dof_map_.data() + static_cast<std::size_t>(t) * element_.size(),
            static_cast<std::size_t>(element_.size())};
  }
  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
  /// Physical position of each global Lagrange node.
  const std::vector<Point>& node_positions() const { return node_positions_; }

  /// Volume rule of order 3p + 2 and edge rule of order 2p + 2 with tabulated bases.
  const BasisTable& volume_table() const { return volume_; }
  const BasisTable& edge_table(int local_edge) const { return edges_[local_edge]; }

 private:
  MeshPtr mesh_;
  LagrangeElement element_;
  int n_dofs_ = 0;
  std::vector<int> dof_map_;
  std::vector<int> boundary_dofs_;
  std::vector<Point> node_positions_;
  BasisTable volume_;
  std::array<BasisTable, 3> edges_;
};

/// Throws ArgumentError unless 1 <= p <= 4.
SpacePtr make_space(MeshPtr mesh, int degree);

BasisTable tabulate(const LagrangeElement& element, QuadratureRule rule);

/// Discrete function: complex coefficients over a FeSpace.
class FeField {
 public:
  explicit FeField(SpacePtr space);
  FeField(SpacePtr space, CVector coefficients);

  const FeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const CVector& coefficients() const { return coefficients_; }
  CVector& coefficients() { return coefficients_; }
  cplx operator[](int i) const { return coefficients_[i]; }

  /// Value and physical gradient at reference point xi of triangle t.
  struct LocalValue {
    cplx value;
    cplx dx;
    cplx dy;
  };
  LocalValue local_value(int t, Point xi) const;

 private:
  SpacePtr space_;
  CVector coefficients_;
};

using ComplexFunction = std::function<cplx(Point)>;

/// Nodal interpolant; throws DataError on non-finite values.
FeField interpolate(const SpacePtr& space, const ComplexFunction& func);

/// Point evaluation; throws NotFoundError outside the mesh.
cplx evaluate(const FeField& field, Point x);

}  // namespace nlh
