#include "nlh/fe_space.hpp"

#include <algorithm>
#include <string>

namespace nlh {

BasisTable tabulate(const LagrangeElement& element, QuadratureRule rule) {
  BasisTable table;
  table.values.resize(rule.size());
  table.gradients.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    element.values(rule.points[q], table.values[q]);
    element.gradients(rule.points[q], table.gradients[q]);
  }
  table.rule = std::move(rule);
  return table;
}

FeSpace::FeSpace(MeshPtr mesh, int degree) : mesh_(std::move(mesh)), element_(degree) {
  if (degree < 1 || degree > 4) {
    throw ArgumentError("FeSpace: degree must be in 1..4, got " + std::to_string(degree));
  }
  const Mesh& m = *mesh_;
  const int p = degree;
  const int nv = m.num_vertices();
  const int ne = m.num_edges();
  const int per_edge = p - 1;
  const int per_cell = element_.interior_size();
  n_dofs_ = nv + per_edge * ne + per_cell * m.num_triangles();

  const int nloc = element_.size();
  dof_map_.resize(static_cast<std::size_t>(m.num_triangles()) * nloc);
  for (int t = 0; t < m.num_triangles(); ++t) {
    int* d = dof_map_.data() + static_cast<std::size_t>(t) * nloc;
    const auto& tri = m.triangles()[t];
    for (int i = 0; i < 3; ++i) d[i] = tri[i];
    for (int e = 0; e < 3; ++e) {
      const int edge = m.triangle_edge(t, e);
      // Global edge dofs run from the lower to the higher vertex index.
      const bool forward = tri[e] < tri[(e + 1) % 3];
      for (int j = 0; j < per_edge; ++j) {
        const int g = forward ? j : per_edge - 1 - j;
        d[element_.edge_node(e, j)] = nv + per_edge * edge + g;
      }
    }
    for (int j = 0; j < per_cell; ++j) d[3 + 3 * per_edge + j] = nv + per_edge * ne + per_cell * t + j;
  }

  node_positions_.resize(n_dofs_);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto d = dofs(t);
    for (int i = 0; i < nloc; ++i) node_positions_[d[i]] = m.map(t, element_.nodes()[i]);
  }

  std::vector<char> on_boundary(n_dofs_, 0);
  for (int e : m.boundary_edges()) {
    const Edge& edge = m.edges()[e];
    const int t = edge.triangles[0];
    const int le = edge.local[0];
    const auto d = dofs(t);
    on_boundary[d[le]] = 1;
    on_boundary[d[(le + 1) % 3]] = 1;
    for (int j = 0; j < per_edge; ++j) on_boundary[d[element_.edge_node(le, j)]] = 1;
  }
  for (int i = 0; i < n_dofs_; ++i) {
    if (on_boundary[i]) boundary_dofs_.push_back(i);
  }

  volume_ = tabulate(element_, triangle_quadrature(3 * p + 2));
  const QuadratureRule line = edge_quadrature(2 * p + 2);
  for (int e = 0; e < 3; ++e) {
    QuadratureRule r = line;
    for (auto& pt : r.points) pt = reference_edge_point(e, pt.x);
    edges_[e] = tabulate(element_, std::move(r));
  }
}

SpacePtr make_space(MeshPtr mesh, int degree) {
  if (!mesh) throw ArgumentError("make_space: null mesh");
  return std::make_shared<FeSpace>(std::move(mesh), degree);
}

FeField::FeField(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw ArgumentError("FeField: null space");
  coefficients_.assign(space_->n_dofs(), cplx{});
}

FeField::FeField(SpacePtr space, CVector coefficients)
    : space_(std::move(space)), coefficients_(std::move(coefficients)) {
  if (!space_) throw ArgumentError("FeField: null space");
  if (static_cast<int>(coefficients_.size()) != space_->n_dofs()) {
    throw ArgumentError("FeField: coefficient vector length does not match the space");
  }
}

FeField::LocalValue FeField::local_value(int t, Point xi) const {
  std::vector<double> phi;
  std::vector<Point> grad;
  space_->element().values(xi, phi);
  space_->element().gradients(xi, grad);
  const Mat2 jac = space_->mesh().jacobian(t, xi);
  const auto d = space_->dofs(t);
  LocalValue out{};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const cplx c = coefficients_[d[i]];
    const Point g = jac.apply_inverse_transpose(grad[i]);
    out.value += c * phi[i];
    out.dx += c * g.x;
    out.dy += c * g.y;
  }
  return out;
}

FeField interpolate(const SpacePtr& space, const ComplexFunction& func) {
  FeField field(space);
  const auto& nodes = space->node_positions();
  for (int i = 0; i < space->n_dofs(); ++i) {
    const cplx v = func(nodes[i]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DataError("interpolate: non-finite function value at node " + std::to_string(i));
    }
    field.coefficients()[i] = v;
  }
  return field;
}

cplx evaluate(const FeField& field, Point x) {
  const Location loc = field.space().mesh().locate_point(x);
  std::vector<double> phi;
  field.space().element().values(loc.xi, phi);
  const auto d = field.space().dofs(loc.triangle);
  cplx v{};
  for (std::size_t i = 0; i < d.size(); ++i) v += field[d[i]] * phi[i];
  return v;
}

}  // namespace nlh
