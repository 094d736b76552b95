#include "nlh/mesh.hpp"

#include "nlh/quadrature.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

namespace nlh {

namespace {

double tag_radius(EdgeTag tag) { return tag == EdgeTag::Gamma ? kDomainRadius : kInterfaceRadius; }

// Arc-length-uniform point on the circle of radius r between a and b.
Point arc_point(Point a, Point b, double r, double s) {
  const double ta = std::atan2(a.y, a.x);
  double dt = std::atan2(b.y, b.x) - ta;
  if (dt > kPi) dt -= 2.0 * kPi;
  if (dt < -kPi) dt += 2.0 * kPi;
  const double t = ta + s * dt;
  return {r * std::cos(t), r * std::sin(t)};
}

bool inside_reference(Point xi, double tol) {
  return xi.x >= -tol && xi.y >= -tol && 1.0 - xi.x - xi.y >= -tol;
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<Region> regions,
           int geometric_degree)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      regions_(std::move(regions)),
      geometric_degree_(geometric_degree) {
  if (geometric_degree < 1 || geometric_degree > 4) {
    throw ArgumentError("Mesh: geometric degree must be in 1..4, got " +
                        std::to_string(geometric_degree));
  }
  if (regions_.size() != triangles_.size()) throw ArgumentError("Mesh: one region flag per triangle");
  const int nv = num_vertices();
  for (const auto& tri : triangles_) {
    for (int v : tri) {
      if (v < 0 || v >= nv) throw ArgumentError("Mesh: vertex index out of range");
    }
    if (cross(vertices_[tri[1]] - vertices_[tri[0]], vertices_[tri[2]] - vertices_[tri[0]]) <= 0.0) {
      throw ArgumentError("Mesh: triangles must be counterclockwise and non-degenerate");
    }
  }
  parents_.assign(triangles_.size(), ParentLink{});
  build_edges();
  build_geometry();
  build_locator();
}

void Mesh::build_edges() {
  std::unordered_map<long long, int> index;
  index.reserve(triangles_.size() * 2);
  triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
  for (int t = 0; t < num_triangles(); ++t) {
    for (int e = 0; e < 3; ++e) {
      int a = triangles_[t][e];
      int b = triangles_[t][(e + 1) % 3];
      if (a > b) std::swap(a, b);
      const long long key = static_cast<long long>(a) * vertices_.size() + b;
      auto [it, inserted] = index.try_emplace(key, num_edges());
      if (inserted) {
        Edge edge;
        edge.vertices = {a, b};
        edge.triangles[0] = t;
        edge.local[0] = e;
        edges_.push_back(edge);
      } else {
        Edge& edge = edges_[it->second];
        if (edge.triangles[1] != -1) {
          throw ArgumentError("Mesh: edge shared by more than two triangles");
        }
        edge.triangles[1] = t;
        edge.local[1] = e;
      }
      triangle_edges_[t][e] = it->second;
    }
  }
  for (int i = 0; i < num_edges(); ++i) {
    Edge& edge = edges_[i];
    if (edge.triangles[1] == -1) {
      edge.tag = EdgeTag::Gamma;
      boundary_edges_.push_back(i);
    } else if (regions_[edge.triangles[0]] != regions_[edge.triangles[1]]) {
      edge.tag = EdgeTag::Interface;
    }
  }
}

void Mesh::build_geometry() {
  const int q = geometric_degree_;
  geometry_element_ = std::make_shared<LagrangeElement>(q);
  curved_nodes_.assign(triangles_.size(), {});
  h_ = 0.0;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    if (q > 1) {
      std::array<bool, 3> curved{};
      bool any = false;
      for (int e = 0; e < 3; ++e) {
        curved[e] = edges_[triangle_edges_[t][e]].tag != EdgeTag::Interior;
        any = any || curved[e];
      }
      if (any) {
        // Polynomial blending of the arc deviation d(s): the displacement
        // l_a l_b d(s*) / (s*(1 - s*)) with s* = (1 + l_b - l_a) / 2 is d on the
        // curved edge, vanishes on the other two, and keeps its m-th
        // derivatives O(h^m). (The rational Gordon-Hall blend does not: its
        // interpolant at interior nodes carries cubic terms of size O(h^2),
        // which costs convergence order for q >= 3.)
        std::vector<Point>& nodes = curved_nodes_[t];
        for (const Point xi : geometry_element_->nodes()) {
          const std::array<double, 3> l{1.0 - xi.x - xi.y, xi.x, xi.y};
          Point x = l[0] * vertices_[tri[0]] + l[1] * vertices_[tri[1]] + l[2] * vertices_[tri[2]];
          for (int e = 0; e < 3; ++e) {
            if (!curved[e]) continue;
            const int ia = e, ib = (e + 1) % 3;
            const double w = l[ia] * l[ib];
            if (w <= 0.0) continue;
            const double s = 0.5 * (1.0 + l[ib] - l[ia]);
            const Point a = vertices_[tri[ia]];
            const Point b = vertices_[tri[ib]];
            const double r = tag_radius(edges_[triangle_edges_[t][e]].tag);
            const Point chord = (1.0 - s) * a + s * b;
            x = x + (w / (s * (1.0 - s))) * (arc_point(a, b, r, s) - chord);
          }
          nodes.push_back(x);
        }
      }
    }
    h_ = std::max(h_, diameter(t));
  }
}

void Mesh::build_locator() {
  grid_n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(triangles_.size()) / 2.0)));
  buckets_.assign(static_cast<std::size_t>(grid_n_) * grid_n_, {});
  const double lo = -1.05, width = 2.1;
  auto cell = [&](double v) {
    return std::clamp(static_cast<int>((v - lo) / width * grid_n_), 0, grid_n_ - 1);
  };
  for (int t = 0; t < num_triangles(); ++t) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto extend = [&](Point p) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    };
    for (int v : triangles_[t]) extend(vertices_[v]);
    for (const Point p : curved_nodes_[t]) extend(p);
    const double pad = 0.05 * diameter(t) + 1e-12;
    for (int i = cell(xmin - pad); i <= cell(xmax + pad); ++i) {
      for (int j = cell(ymin - pad); j <= cell(ymax + pad); ++j) {
        buckets_[static_cast<std::size_t>(j) * grid_n_ + i].push_back(t);
      }
    }
  }
}

Point Mesh::map(int t, Point xi) const {
  const auto& tri = triangles_[t];
  if (!is_curved(t)) {
    const Point a = vertices_[tri[0]];
    return a + xi.x * (vertices_[tri[1]] - a) + xi.y * (vertices_[tri[2]] - a);
  }
  std::vector<double> psi;
  geometry_element_->values(xi, psi);
  Point x{};
  const auto& nodes = curved_nodes_[t];
  for (std::size_t i = 0; i < nodes.size(); ++i) x = x + psi[i] * nodes[i];
  return x;
}

Mat2 Mesh::jacobian(int t, Point xi) const {
  const auto& tri = triangles_[t];
  if (!is_curved(t)) {
    const Point a = vertices_[tri[0]];
    const Point d1 = vertices_[tri[1]] - a;
    const Point d2 = vertices_[tri[2]] - a;
    return {d1.x, d2.x, d1.y, d2.y};
  }
  std::vector<Point> grad;
  geometry_element_->gradients(xi, grad);
  Mat2 j;
  const auto& nodes = curved_nodes_[t];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    j.a += nodes[i].x * grad[i].x;
    j.b += nodes[i].x * grad[i].y;
    j.c += nodes[i].y * grad[i].x;
    j.d += nodes[i].y * grad[i].y;
  }
  return j;
}

double Mesh::diameter(int t) const {
  double d = 0.0;
  if (is_curved(t)) {
    const auto& nodes = curved_nodes_[t];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < nodes.size(); ++j) d = std::max(d, norm(nodes[i] - nodes[j]));
    }
    return d;
  }
  const auto& tri = triangles_[t];
  for (int e = 0; e < 3; ++e) d = std::max(d, norm(vertices_[tri[e]] - vertices_[tri[(e + 1) % 3]]));
  return d;
}

std::optional<Point> Mesh::inverse_map(int t, Point x, double tol) const {
  const auto& tri = triangles_[t];
  const Point a = vertices_[tri[0]];
  const Mat2 affine{vertices_[tri[1]].x - a.x, vertices_[tri[2]].x - a.x, vertices_[tri[1]].y - a.y,
                    vertices_[tri[2]].y - a.y};
  Point xi = affine.inverse().apply(x - a);
  if (is_curved(t)) {
    // Damped Newton on F(xi) = x; the affine preimage is the starting guess.
    Point r = map(t, xi) - x;
    double res = norm(r);
    for (int it = 0; it < 30 && res > 1e-12; ++it) {
      const Point step = jacobian(t, xi).inverse().apply(r);
      double damping = 1.0;
      Point trial = xi - step;
      Point rt = map(t, trial) - x;
      while (norm(rt) > res && damping > 1e-4) {
        damping *= 0.5;
        trial = xi - damping * step;
        rt = map(t, trial) - x;
      }
      xi = trial;
      r = rt;
      res = norm(r);
    }
    if (!(res <= 1e-10)) return std::nullopt;
  }
  if (!inside_reference(xi, tol)) return std::nullopt;
  return xi;
}

Location Mesh::locate_point(Point x) const {
  const double lo = -1.05, width = 2.1;
  const int i = static_cast<int>((x.x - lo) / width * grid_n_);
  const int j = static_cast<int>((x.y - lo) / width * grid_n_);
  if (i >= 0 && j >= 0 && i < grid_n_ && j < grid_n_) {
    for (int t : buckets_[static_cast<std::size_t>(j) * grid_n_ + i]) {
      if (auto xi = inverse_map(t, x)) return {t, *xi};
    }
  }
  std::ostringstream msg;
  msg << "locate_point: (" << x.x << ", " << x.y << ") is outside the mesh";
  throw NotFoundError(msg.str());
}

double Mesh::area(int order) const {
  const QuadratureRule rule = triangle_quadrature(order);
  double total = 0.0;
  for (int t = 0; t < num_triangles(); ++t) {
    for (std::size_t q = 0; q < rule.size(); ++q) total += rule.weights[q] * jacobian(t, rule.points[q]).det();
  }
  return total;
}

MeshPtr base_disk_mesh(int geometric_degree) {
  std::vector<Point> v;
  v.push_back({0.0, 0.0});
  for (int i = 0; i < 6; ++i) {
    const double t = i * kPi / 3.0;
    v.push_back({kInterfaceRadius * std::cos(t), kInterfaceRadius * std::sin(t)});
  }
  for (int i = 0; i < 12; ++i) {
    const double t = i * kPi / 6.0;
    v.push_back({kDomainRadius * std::cos(t), kDomainRadius * std::sin(t)});
  }
  auto in = [](int i) { return 1 + (i % 6); };
  auto out = [](int i) { return 7 + (i % 12); };
  std::vector<Mesh::Triangle> tris;
  std::vector<Region> regions;
  for (int i = 0; i < 6; ++i) {
    tris.push_back({0, in(i), in(i + 1)});
    regions.push_back(Region::InD);
  }
  for (int i = 0; i < 6; ++i) {
    tris.push_back({in(i), out(2 * i), out(2 * i + 1)});
    tris.push_back({in(i), out(2 * i + 1), in(i + 1)});
    tris.push_back({in(i + 1), out(2 * i + 1), out(2 * i + 2)});
    regions.insert(regions.end(), 3, Region::OutD);
  }
  return std::make_shared<Mesh>(std::move(v), std::move(tris), std::move(regions), geometric_degree);
}

MeshPtr refine(const MeshPtr& coarse) {
  const Mesh& m = *coarse;
  std::vector<Point> v = m.vertices();
  const int nv = m.num_vertices();
  for (const Edge& e : m.edges()) {
    const Point a = m.vertices()[e.vertices[0]];
    const Point b = m.vertices()[e.vertices[1]];
    Point mid = 0.5 * (a + b);
    if (e.tag != EdgeTag::Interior) mid = (tag_radius(e.tag) / norm(a + b)) * (a + b);
    v.push_back(mid);
  }
  static const std::array<std::array<Point, 3>, 4> kChildRef{{
      {{{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}}},
      {{{0.5, 0.0}, {1.0, 0.0}, {0.5, 0.5}}},
      {{{0.0, 0.5}, {0.5, 0.5}, {0.0, 1.0}}},
      {{{0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}}},
  }};
  std::vector<Mesh::Triangle> tris;
  std::vector<Region> regions;
  std::vector<ParentLink> parents;
  tris.reserve(4 * m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& p = m.triangles()[t];
    const int m01 = nv + m.triangle_edge(t, 0);
    const int m12 = nv + m.triangle_edge(t, 1);
    const int m20 = nv + m.triangle_edge(t, 2);
    const std::array<Mesh::Triangle, 4> children{{
        {p[0], m01, m20},
        {m01, p[1], m12},
        {m20, m12, p[2]},
        {m01, m12, m20},
    }};
    for (int c = 0; c < 4; ++c) {
      tris.push_back(children[c]);
      regions.push_back(m.region(t));
      parents.push_back({t, kChildRef[c]});
    }
  }
  auto fine = std::make_shared<Mesh>(std::move(v), std::move(tris), std::move(regions), m.geometric_degree());
  fine->depth_ = m.depth_ + 1;
  fine->coarser_ = coarse;
  fine->parents_ = std::move(parents);
  return fine;
}

MeshPtr disk_mesh_level(int level, int geometric_degree) {
  if (level < kBaseLevel) {
    throw ArgumentError("disk_mesh_level: level must be >= " + std::to_string(kBaseLevel));
  }
  MeshPtr mesh = base_disk_mesh(geometric_degree);
  for (int l = kBaseLevel; l < level; ++l) mesh = refine(mesh);
  return mesh;
}

MeshPtr build_disk_mesh(double target_h, int geometric_degree, long max_triangles) {
  if (!(target_h > 0.0 && target_h <= 1.0)) throw ArgumentError("build_disk_mesh: need 0 < target_h <= 1");
  MeshPtr mesh = base_disk_mesh(geometric_degree);
  while (mesh->h() > target_h) {
    if (4L * mesh->num_triangles() > max_triangles) {
      throw ResourceError("build_disk_mesh: target_h " + std::to_string(target_h) +
                          " exceeds the triangle budget");
    }
    mesh = refine(mesh);
  }
  return mesh;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os.precision(17);
  os << "nlh-mesh 1\n";
  os << "geometric_degree " << mesh.geometric_degree() << "\n";
  for (const Point p : mesh.vertices()) os << "v " << p.x << " " << p.y << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    os << "t " << tri[0] << " " << tri[1] << " " << tri[2] << " "
       << (mesh.region(t) == Region::InD ? 1 : 0) << "\n";
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!mesh.is_curved(t)) continue;
    os << "c " << t << " " << mesh.curved_nodes(t).size();
    for (const Point p : mesh.curved_nodes(t)) os << " " << p.x << " " << p.y;
    os << "\n";
  }
}

MeshPtr read_mesh(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "nlh-mesh 1") throw DataError("read_mesh: bad header");
  int q = 1;
  std::vector<Point> v;
  std::vector<Mesh::Triangle> tris;
  std::vector<Region> regions;
  std::map<int, std::vector<Point>> curved;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "geometric_degree") {
      ls >> q;
    } else if (kind == "v") {
      Point p;
      ls >> p.x >> p.y;
      v.push_back(p);
    } else if (kind == "t") {
      Mesh::Triangle tri;
      int flag = 0;
      ls >> tri[0] >> tri[1] >> tri[2] >> flag;
      tris.push_back(tri);
      regions.push_back(flag ? Region::InD : Region::OutD);
    } else if (kind == "c") {
      int t = 0, n = 0;
      ls >> t >> n;
      auto& nodes = curved[t];
      for (int i = 0; i < n; ++i) {
        Point p;
        ls >> p.x >> p.y;
        nodes.push_back(p);
      }
    } else {
      throw DataError("read_mesh: unknown record '" + kind + "'");
    }
    if (ls.fail()) throw DataError("read_mesh: malformed line '" + line + "'");
  }
  auto mesh = std::make_shared<Mesh>(std::move(v), std::move(tris), std::move(regions), q);
  // Curved maps are regenerated from the topology; the dump must agree.
  for (const auto& [t, nodes] : curved) {
    if (t < 0 || t >= mesh->num_triangles() || mesh->curved_nodes(t).size() != nodes.size()) {
      throw DataError("read_mesh: curved-node record does not match the topology");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (norm(nodes[i] - mesh->curved_nodes(t)[i]) > 1e-12) {
        throw DataError("read_mesh: curved-node coordinates disagree with the regenerated map");
      }
    }
  }
  return mesh;
}

}  // namespace nlh
