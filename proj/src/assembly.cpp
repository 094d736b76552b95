#include "nlh/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace nlh {

namespace {

void check_field(const HelmholtzOperators& ops, const FeField& f, const char* what) {
  if (f.space_ptr() != ops.space_ptr() &&
      (f.space().mesh_ptr() != ops.space().mesh_ptr() || f.space().degree() != ops.space().degree())) {
    throw ArgumentError(std::string(what) + ": field lives on a different space");
  }
  for (const cplx c : f.coefficients()) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw DataError(std::string(what) + ": non-finite field coefficient");
    }
  }
}

}  // namespace

HelmholtzOperators::HelmholtzOperators(SpacePtr space) : space_(std::move(space)) {
  const FeSpace& V = *space_;
  const Mesh& mesh = V.mesh();
  const int nloc = V.dofs_per_element();
  const int nt = mesh.num_triangles();

  std::vector<std::vector<int>> rows(V.n_dofs());
  for (int t = 0; t < nt; ++t) {
    const auto d = V.dofs(t);
    for (int i : d) rows[i].insert(rows[i].end(), d.begin(), d.end());
  }
  pattern_ = make_pattern(V.n_dofs(), std::move(rows));

  positions_.resize(static_cast<std::size_t>(nt) * nloc * nloc);
  for (int t = 0; t < nt; ++t) {
    const auto d = V.dofs(t);
    int* pos = positions_.data() + static_cast<std::size_t>(t) * nloc * nloc;
    for (int i = 0; i < nloc; ++i) {
      for (int j = 0; j < nloc; ++j) pos[i * nloc + j] = pattern_->find(d[i], d[j]);
    }
  }

  const BasisTable& vt = V.volume_table();
  const std::size_t nq = vt.rule.size();
  stiffness_.assign(pattern_->nnz(), 0.0);
  mass_.assign(pattern_->nnz(), 0.0);
  boundary_mass_.assign(pattern_->nnz(), 0.0);
  jxw_.resize(static_cast<std::size_t>(nt) * nq);

  std::vector<double> sloc(nloc * nloc), mloc(nloc * nloc);
  std::vector<Point> grad(nloc);
  for (int t = 0; t < nt; ++t) {
    if (mesh.region(t) == Region::InD) in_d_.push_back(t);
    std::fill(sloc.begin(), sloc.end(), 0.0);
    std::fill(mloc.begin(), mloc.end(), 0.0);
    const bool curved = mesh.is_curved(t);
    Mat2 jac = mesh.jacobian(t, {1.0 / 3.0, 1.0 / 3.0});
    for (std::size_t q = 0; q < nq; ++q) {
      if (curved) jac = mesh.jacobian(t, vt.rule.points[q]);
      const double det = jac.det();
      if (!(det > 0.0)) {
        throw DataError("HelmholtzOperators: non-positive Jacobian on triangle " + std::to_string(t));
      }
      const double w = vt.rule.weights[q] * det;
      jxw_[t * nq + q] = w;
      const auto& phi = vt.values[q];
      for (int i = 0; i < nloc; ++i) grad[i] = jac.apply_inverse_transpose(vt.gradients[q][i]);
      for (int i = 0; i < nloc; ++i) {
        for (int j = 0; j < nloc; ++j) {
          sloc[i * nloc + j] += w * dot(grad[i], grad[j]);
          mloc[i * nloc + j] += w * phi[i] * phi[j];
        }
      }
    }
    const auto pos = positions(t);
    for (int k = 0; k < nloc * nloc; ++k) {
      stiffness_[pos[k]] += sloc[k];
      mass_[pos[k]] += mloc[k];
    }
  }

  // Boundary data oscillates on the scale 1/k, which the operator edge rule
  // of order 2p + 2 under-resolves on coarse meshes. Edges are few, so a
  // fixed high-order rule costs nothing.
  std::array<BasisTable, 3> tables;
  const QuadratureRule line = edge_quadrature(2 * V.degree() + 24);
  for (int e = 0; e < 3; ++e) {
    QuadratureRule r = line;
    for (auto& pt : r.points) pt = reference_edge_point(e, pt.x);
    tables[e] = tabulate(V.element(), std::move(r));
  }
  for (int e : mesh.boundary_edges()) {
    const Edge& edge = mesh.edges()[e];
    const int t = edge.triangles[0];
    const int le = edge.local[0];
    const BasisTable& et = tables[le];
    const Point tangent = reference_edge_tangent(le);
    const auto pos = positions(t);
    for (std::size_t q = 0; q < et.rule.size(); ++q) {
      const double ds = et.rule.weights[q] * norm(mesh.jacobian(t, et.rule.points[q]).apply(tangent));
      const auto& phi = et.values[q];
      for (int i = 0; i < nloc; ++i) {
        for (int j = 0; j < nloc; ++j) boundary_mass_[pos[i * nloc + j]] += ds * phi[i] * phi[j];
      }
    }
  }
}

std::vector<double> HelmholtzOperators::kerr_mass(const FeField& phi) const {
  check_field(*this, phi, "kerr_mass");
  const FeSpace& V = *space_;
  const BasisTable& vt = V.volume_table();
  const int nloc = V.dofs_per_element();
  std::vector<double> out(pattern_->nnz(), 0.0);
  std::vector<double> loc(nloc * nloc);
  for (int t : in_d_) {
    std::fill(loc.begin(), loc.end(), 0.0);
    const auto d = V.dofs(t);
    const auto w = weights(t);
    for (std::size_t q = 0; q < w.size(); ++q) {
      const auto& b = vt.values[q];
      cplx val{};
      for (int i = 0; i < nloc; ++i) val += phi[d[i]] * b[i];
      const double c = w[q] * std::norm(val);
      for (int i = 0; i < nloc; ++i) {
        const double ci = c * b[i];
        for (int j = 0; j < nloc; ++j) loc[i * nloc + j] += ci * b[j];
      }
    }
    const auto pos = positions(t);
    for (int k = 0; k < nloc * nloc; ++k) out[pos[k]] += loc[k];
  }
  return out;
}

CVector HelmholtzOperators::kerr_load(const FeField& u) const {
  check_field(*this, u, "kerr_load");
  const FeSpace& V = *space_;
  const BasisTable& vt = V.volume_table();
  const int nloc = V.dofs_per_element();
  CVector out(V.n_dofs());
  for (int t : in_d_) {
    const auto d = V.dofs(t);
    const auto w = weights(t);
    for (std::size_t q = 0; q < w.size(); ++q) {
      const auto& b = vt.values[q];
      cplx val{};
      for (int i = 0; i < nloc; ++i) val += u[d[i]] * b[i];
      const cplx c = w[q] * std::norm(val) * val;
      for (int i = 0; i < nloc; ++i) out[d[i]] += c * b[i];
    }
  }
  return out;
}

namespace {

// Elements overlapping a narrow source support are integrated with a
// composite rule: the reference triangle is split into m^2 congruent pieces
// so that each piece is a few times smaller than the support radius.
constexpr double kPiecesPerRadius = 4.0;

int subdivision(const Mesh& mesh, int t, const SupportDisk& disk) {
  const auto& tri = mesh.triangles()[t];
  Point lo = mesh.vertices()[tri[0]], hi = lo;
  auto grow = [&](Point p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  };
  for (int v : tri) grow(mesh.vertices()[v]);
  for (const Point& p : mesh.curved_nodes(t)) grow(p);
  const double dx = std::max({lo.x - disk.center.x, 0.0, disk.center.x - hi.x});
  const double dy = std::max({lo.y - disk.center.y, 0.0, disk.center.y - hi.y});
  // Curved edges bulge at most O(h^2) beyond their nodes; pad by 10% of the size.
  const double pad = 0.1 * std::max(hi.x - lo.x, hi.y - lo.y);
  if (std::hypot(dx, dy) > disk.radius + pad) return 1;
  return std::max(1, static_cast<int>(std::ceil(mesh.diameter(t) * kPiecesPerRadius / disk.radius)));
}

}  // namespace

CVector HelmholtzOperators::source_load(const ProblemSpec& spec) const {
  const FeSpace& V = *space_;
  const Mesh& mesh = V.mesh();
  const BasisTable& vt = V.volume_table();
  const int nloc = V.dofs_per_element();
  const auto support = source_support(spec);
  CVector out(V.n_dofs());
  std::vector<double> phi;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto d = V.dofs(t);
    const int m = support ? subdivision(mesh, t, *support) : 1;
    if (m == 1) {
      const auto w = weights(t);
      for (std::size_t q = 0; q < w.size(); ++q) {
        const cplx f = source_value(spec, mesh.map(t, vt.rule.points[q]), mesh.region(t));
        if (f == cplx{}) continue;
        for (int i = 0; i < nloc; ++i) out[d[i]] += w[q] * f * vt.values[q][i];
      }
      continue;
    }
    const double hm = 1.0 / m;
    auto piece = [&](Point a, Point b, Point c) {
      for (std::size_t q = 0; q < vt.rule.size(); ++q) {
        const Point s = vt.rule.points[q];
        const Point xi = a + s.x * (b - a) + s.y * (c - a);
        const cplx f = source_value(spec, mesh.map(t, xi), mesh.region(t));
        if (f == cplx{}) continue;
        const double w = vt.rule.weights[q] * hm * hm * mesh.jacobian(t, xi).det();
        V.element().values(xi, phi);
        for (int i = 0; i < nloc; ++i) out[d[i]] += w * f * phi[i];
      }
    };
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i + j < m; ++i) {
        const Point p0{i * hm, j * hm}, p1{(i + 1) * hm, j * hm}, p2{i * hm, (j + 1) * hm};
        piece(p0, p1, p2);
        if (i + j + 1 < m) piece(p1, Point{(i + 1) * hm, (j + 1) * hm}, p2);
      }
    }
  }
  return out;
}

CVector HelmholtzOperators::boundary_load(const ProblemSpec& spec) const {
  const FeSpace& V = *space_;
  const Mesh& mesh = V.mesh();
  const int nloc = V.dofs_per_element();
  CVector out(V.n_dofs());
  if (std::holds_alternative<ZeroBoundary>(spec.boundary)) return out;
  // Boundary data oscillates on the scale 1/k, which the operator edge rule
  // of order 2p + 2 under-resolves on coarse meshes. Edges are few, so a
  // fixed high-order rule costs nothing.
  std::array<BasisTable, 3> tables;
  const QuadratureRule line = edge_quadrature(2 * V.degree() + 24);
  for (int e = 0; e < 3; ++e) {
    QuadratureRule r = line;
    for (auto& pt : r.points) pt = reference_edge_point(e, pt.x);
    tables[e] = tabulate(V.element(), std::move(r));
  }
  for (int e : mesh.boundary_edges()) {
    const Edge& edge = mesh.edges()[e];
    const int t = edge.triangles[0];
    const int le = edge.local[0];
    const BasisTable& et = tables[le];
    const Point tangent = reference_edge_tangent(le);
    const auto d = V.dofs(t);
    for (std::size_t q = 0; q < et.rule.size(); ++q) {
      const Point xi = et.rule.points[q];
      const double ds = et.rule.weights[q] * norm(mesh.jacobian(t, xi).apply(tangent));
      const cplx g = boundary_value(spec, mesh.map(t, xi));
      for (int i = 0; i < nloc; ++i) out[d[i]] += ds * g * et.values[q][i];
    }
  }
  return out;
}

CVector HelmholtzOperators::data_load(const ProblemSpec& spec) const {
  CVector load = source_load(spec);
  const CVector g = boundary_load(spec);
  for (std::size_t i = 0; i < load.size(); ++i) load[i] += g[i];
  return load;
}

CVector HelmholtzOperators::apply(std::span<const double> values, std::span<const cplx> x) const {
  const auto& p = *pattern_;
  CVector y(p.n);
  for (int i = 0; i < p.n; ++i) {
    cplx s{};
    for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) s += values[k] * x[p.col[k]];
    y[i] = s;
  }
  return y;
}

double HelmholtzOperators::energy_norm(std::span<const cplx> x, double k) const {
  const CVector sx = apply(stiffness_, x);
  const CVector mx = apply(mass_, x);
  double s = 0.0, m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += (std::conj(x[i]) * sx[i]).real();
    m += (std::conj(x[i]) * mx[i]).real();
  }
  return std::sqrt(std::max(0.0, s + k * k * m));
}

AssembledSystem assemble_linearized(const HelmholtzOperators& ops, const ProblemSpec& spec,
                                    const FeField& phi) {
  return assemble_linearized(ops, spec, phi, ops.data_load(spec));
}

AssembledSystem assemble_linearized(const HelmholtzOperators& ops, const ProblemSpec& spec,
                                    const FeField& phi, std::span<const cplx> data_load) {
  spec.validate();
  if (static_cast<int>(data_load.size()) != ops.space().n_dofs()) {
    throw ArgumentError("assemble_linearized: load length does not match the space");
  }
  check_field(ops, phi, "assemble_linearized");
  const double k2 = spec.k * spec.k;
  const double c = spec.scheme == Scheme::Frozen ? 1.0 : 2.0;
  const int nnz = ops.pattern()->nnz();
  std::vector<double> kerr;
  if (spec.epsilon != 0.0) kerr = ops.kerr_mass(phi);

  CVector values(nnz);
  for (int k = 0; k < nnz; ++k) {
    double w = ops.mass()[k];
    if (!kerr.empty()) w += c * spec.epsilon * kerr[k];
    values[k] = cplx{ops.stiffness()[k] - k2 * w, spec.k * ops.boundary_mass()[k]};
  }

  CVector load(data_load.begin(), data_load.end());
  if (spec.scheme == Scheme::NewtonLike && spec.epsilon != 0.0) {
    const CVector cubic = ops.kerr_load(phi);
    for (std::size_t i = 0; i < load.size(); ++i) load[i] -= k2 * spec.epsilon * cubic[i];
  }
  return {SparseMatrixC(ops.pattern(), std::move(values)), std::move(load), spec.scheme, phi};
}

AssembledSystem assemble_linearized(const SpacePtr& space, const ProblemSpec& spec, const FeField& phi) {
  return assemble_linearized(HelmholtzOperators(space), spec, phi);
}

CVector assemble_nonlinear_residual(const HelmholtzOperators& ops, const ProblemSpec& spec, const FeField& u) {
  return assemble_nonlinear_residual(ops, spec, u, ops.data_load(spec));
}

CVector assemble_nonlinear_residual(const HelmholtzOperators& ops, const ProblemSpec& spec, const FeField& u,
                                    std::span<const cplx> data_load) {
  spec.validate();
  if (static_cast<int>(data_load.size()) != ops.space().n_dofs()) {
    throw ArgumentError("assemble_nonlinear_residual: load length does not match the space");
  }
  check_field(ops, u, "assemble_nonlinear_residual");
  const double k2 = spec.k * spec.k;
  const auto& x = u.coefficients();
  CVector r(data_load.begin(), data_load.end());
  const CVector su = ops.apply(ops.stiffness(), x);
  const CVector mu = ops.apply(ops.mass(), x);
  const CVector bu = ops.apply(ops.boundary_mass(), x);
  CVector cubic;
  if (spec.epsilon != 0.0) cubic = ops.kerr_load(u);
  const cplx ik{0.0, spec.k};
  for (std::size_t i = 0; i < r.size(); ++i) {
    cplx w = mu[i];
    if (!cubic.empty()) w += spec.epsilon * cubic[i];
    r[i] -= su[i] - k2 * w + ik * bu[i];
  }
  return r;
}

CVector assemble_nonlinear_residual(const SpacePtr& space, const ProblemSpec& spec, const FeField& u) {
  return assemble_nonlinear_residual(HelmholtzOperators(space), spec, u);
}

CVector boundary_load(const SpacePtr& space, const ProblemSpec& spec) {
  return HelmholtzOperators(space).boundary_load(spec);
}

}  // namespace nlh
