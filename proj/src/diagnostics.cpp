#include "nlh/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "nlh/assembly.hpp"
#include "nlh/quadrature.hpp"

namespace nlh {

namespace {

int rule_order(int p, int extra) { return std::clamp(3 * p + 2 + extra, 1, 20); }

double sq(cplx z) { return std::norm(z); }

// Ancestor of `fine` at the depth of `coarse`, if `fine` descends from a mesh
// with the same vertices and triangles as `coarse`.
bool related(const Mesh& coarse, const Mesh& fine, const Mesh*& ancestor) {
  const Mesh* m = &fine;
  while (m->refinement_depth() > coarse.refinement_depth() && m->coarser()) m = m->coarser().get();
  if (m->refinement_depth() != coarse.refinement_depth()) return false;
  if (m == &coarse) {
    ancestor = m;
    return true;
  }
  if (m->num_triangles() != coarse.num_triangles() || m->num_vertices() != coarse.num_vertices()) return false;
  if (m->triangles() != coarse.triangles()) return false;
  for (int i = 0; i < m->num_vertices(); ++i) {
    if (norm(m->vertices()[i] - coarse.vertices()[i]) > 1e-13) return false;
  }
  ancestor = m;
  return true;
}

}  // namespace

double energy_norm(const FeField& field, double k) {
  const HelmholtzOperators ops(field.space_ptr());
  return ops.energy_norm(field.coefficients(), k);
}

double energy_norm_quadrature(const FeField& field, double k, int extra_order) {
  const FeSpace& space = field.space();
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = triangle_quadrature(rule_order(space.degree(), extra_order));
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto v = field.local_value(t, rule.points[q]);
      const double w = rule.weights[q] * mesh.jacobian(t, rule.points[q]).det();
      total += w * (sq(v.dx) + sq(v.dy) + k * k * sq(v.value));
    }
  }
  return std::sqrt(total);
}

namespace {

// Evaluates a field at reference points with reusable buffers.
class Evaluator {
 public:
  explicit Evaluator(const FeField& field) : field_(field) {}

  FeField::LocalValue at(int t, Point xi) {
    const FeSpace& space = field_.space();
    space.element().values(xi, phi_);
    space.element().gradients(xi, grad_);
    return combine(t, space.mesh().jacobian(t, xi), phi_, grad_);
  }

  /// Same, with basis values already tabulated at xi and a known Jacobian.
  FeField::LocalValue combine(int t, const Mat2& jac, const std::vector<double>& phi,
                              const std::vector<Point>& grad) const {
    const auto d = field_.space().dofs(t);
    cplx v{}, gx{}, gy{};
    for (std::size_t i = 0; i < d.size(); ++i) {
      const cplx c = field_[d[i]];
      v += c * phi[i];
      gx += c * grad[i].x;
      gy += c * grad[i].y;
    }
    // Reference gradient to physical: J^{-T} applied to the complex pair.
    const Mat2 inv = jac.inverse();
    return {v, inv.a * gx + inv.c * gy, inv.b * gx + inv.d * gy};
  }

 private:
  const FeField& field_;
  std::vector<double> phi_;
  std::vector<Point> grad_;
};

}  // namespace

FieldError error_vs_reference(const FeField& coarse, const FeField& reference, double k) {
  const Mesh& cm = coarse.space().mesh();
  const Mesh& fm = reference.space().mesh();
  const Mesh* ancestor = nullptr;
  const bool linked = related(cm, fm, ancestor);

  const BasisTable& table = reference.space().volume_table();
  Evaluator fine_eval(reference), coarse_eval(coarse);
  double err_h1 = 0.0, err_l2 = 0.0, ref_h1 = 0.0, ref_l2 = 0.0;
  for (int t = 0; t < fm.num_triangles(); ++t) {
    // Composite embedding of t into its ancestor triangle.
    int tc = t;
    std::array<Point, 3> emb{Point{0, 0}, Point{1, 0}, Point{0, 1}};
    if (linked) {
      const Mesh* m = &fm;
      while (m != ancestor) {
        const ParentLink& link = m->parent(tc);
        for (auto& e : emb) e = link.to_parent(e);
        tc = link.triangle;
        m = m->coarser().get();
      }
    }
    for (std::size_t q = 0; q < table.rule.size(); ++q) {
      const Point xi = table.rule.points[q];
      const Point x = fm.map(t, xi);
      const Mat2 jac = fm.jacobian(t, xi);
      const double w = table.rule.weights[q] * jac.det();
      int ct = tc;
      Point cxi;
      if (linked) {
        const Point guess = emb[0] + xi.x * (emb[1] - emb[0]) + xi.y * (emb[2] - emb[0]);
        if (!cm.is_curved(tc)) {
          cxi = guess;
        } else if (auto exact = cm.inverse_map(tc, x, 1e-2)) {
          cxi = *exact;
        } else {
          // Fine and coarse curved boundaries differ slightly; fall back on
          // the reference-coordinate embedding.
          cxi = guess;
        }
      } else {
        try {
          const Location loc = cm.locate_point(x);
          ct = loc.triangle;
          cxi = loc.xi;
        } catch (const NotFoundError& e) {
          throw ArgumentError(std::string("error_vs_reference: unrelated meshes; ") + e.what());
        }
      }
      const auto r = fine_eval.combine(t, jac, table.values[q], table.gradients[q]);
      const auto c = coarse_eval.at(ct, cxi);
      err_h1 += w * (sq(r.dx - c.dx) + sq(r.dy - c.dy));
      err_l2 += w * sq(r.value - c.value);
      ref_h1 += w * (sq(r.dx) + sq(r.dy));
      ref_l2 += w * sq(r.value);
    }
  }
  FieldError out;
  out.energy_abs = std::sqrt(err_h1 + k * k * err_l2);
  out.l2_abs = std::sqrt(err_l2);
  const double ref_energy = std::sqrt(ref_h1 + k * k * ref_l2);
  out.energy_rel = ref_energy > 0.0 ? out.energy_abs / ref_energy : std::numeric_limits<double>::infinity();
  out.l2_rel = ref_l2 > 0.0 ? out.l2_abs / std::sqrt(ref_l2) : std::numeric_limits<double>::infinity();
  return out;
}

FieldError error_vs_exact(const FeField& field, const ExactSolution& exact, double k, int extra_order) {
  const FeSpace& space = field.space();
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = triangle_quadrature(rule_order(space.degree(), extra_order));
  double err_h1 = 0.0, err_l2 = 0.0, ex_h1 = 0.0, ex_l2 = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point xi = rule.points[q];
      const Point x = mesh.map(t, xi);
      const double w = rule.weights[q] * mesh.jacobian(t, xi).det();
      const auto v = field.local_value(t, xi);
      const cplx u = exact.value(x);
      const auto g = exact.gradient(x);
      err_h1 += w * (sq(v.dx - g[0]) + sq(v.dy - g[1]));
      err_l2 += w * sq(v.value - u);
      ex_h1 += w * (sq(g[0]) + sq(g[1]));
      ex_l2 += w * sq(u);
    }
  }
  FieldError out;
  out.energy_abs = std::sqrt(err_h1 + k * k * err_l2);
  out.l2_abs = std::sqrt(err_l2);
  out.energy_rel = out.energy_abs / std::sqrt(ex_h1 + k * k * ex_l2);
  out.l2_rel = out.l2_abs / std::sqrt(ex_l2);
  return out;
}

double linf_on_D(const FeField& field, int extra_order) {
  const FeSpace& space = field.space();
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = triangle_quadrature(rule_order(space.degree(), extra_order));
  std::vector<Point> samples = rule.points;
  const auto& nodes = space.element().nodes();
  samples.insert(samples.end(), nodes.begin(), nodes.end());

  std::vector<double> phi;
  double best = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.region(t) != Region::InD) continue;
    const auto d = space.dofs(t);
    for (const Point& xi : samples) {
      space.element().values(xi, phi);
      cplx v = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) v += field[d[i]] * phi[i];
      best = std::max(best, std::abs(v));
    }
  }
  return best;
}

std::vector<std::optional<double>> fit_rates(const ErrorReport& report) {
  const auto& rows = report.rows;
  if (rows.size() < 2) throw ArgumentError("fit_rates: need at least two levels");
  std::vector<std::optional<double>> slopes;
  for (std::size_t j = 0; j + 1 < rows.size(); ++j) {
    const double e0 = rows[j].rel_energy_err, e1 = rows[j + 1].rel_energy_err;
    if (!(e0 > 0.0) || !(e1 > 0.0) || !std::isfinite(e0) || !std::isfinite(e1) ||
        rows[j].h == rows[j + 1].h) {
      slopes.emplace_back();
      continue;
    }
    slopes.emplace_back(std::log(e0 / e1) / std::log(rows[j].h / rows[j + 1].h));
  }
  return slopes;
}

void write_error_report_csv(std::ostream& os, const ErrorReport& report) {
  std::vector<std::optional<double>> slopes;
  if (report.rows.size() >= 2) slopes = fit_rates(report);
  os.precision(10);
  os << "level,h,ndofs,rel_energy_err,rel_l2_err,slope\n";
  for (std::size_t j = 0; j < report.rows.size(); ++j) {
    const auto& r = report.rows[j];
    os << r.level << "," << r.h << "," << r.ndofs << "," << r.rel_energy_err << "," << r.rel_l2_err << ",";
    if (j > 0 && slopes[j - 1]) os << *slopes[j - 1];
    os << "\n";
  }
}

}  // namespace nlh
