#include "nlh/nonlinear_solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

namespace nlh {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Converged:
      return "CONVERGED";
    case Outcome::MaxIterReached:
      return "MAX_ITER_REACHED";
    case Outcome::Diverged:
      return "DIVERGED";
  }
  return "UNKNOWN";
}

double IterationTrace::final_residual() const {
  return records.empty() ? std::numeric_limits<double>::quiet_NaN() : records.back().rel_residual;
}

double IterationTrace::max_linear_residual() const {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.linear_residual);
  return m;
}

std::optional<double> IterationTrace::average_sigma() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.sigma && std::isfinite(*r.sigma)) {
      sum += *r.sigma;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

bool SolveOptions::default_verify() {
#ifndef NDEBUG
  return true;
#else
  const char* env = std::getenv("NLH_VERIFY_SOLVES");
  return env != nullptr && std::string(env) != "0";
#endif
}

double resolution_indicator(double k, double h, int exponent) { return k * std::pow(k * h, exponent); }

namespace {

bool finite(const CVector& v) {
  for (const cplx c : v) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

}  // namespace

NonlinearSolution solve_nonlinear(const HelmholtzOperators& ops, const ProblemSpec& spec,
                                  const SolveOptions& options) {
  spec.validate();
  const SpacePtr& space = ops.space_ptr();
  FeField u = options.initial_guess ? *options.initial_guess : FeField(space);
  if (u.space().n_dofs() != space->n_dofs()) throw ArgumentError("solve_nonlinear: initial guess on another space");

  const CVector load = ops.data_load(spec);
  const double load_norm = norm2(load);
  const double scale = load_norm > 0.0 ? load_norm : 1.0;

  IterationTrace trace;
  std::unique_ptr<SymbolicAnalysis> symbolic;
  double previous_increment = 0.0;
  using Clock = std::chrono::steady_clock;

  for (int l = 1; l <= spec.max_iter; ++l) {
    const auto start = Clock::now();
    IterationRecord rec;
    rec.iter = l;

    AssembledSystem sys = assemble_linearized(ops, spec, u, load);
    if (!symbolic) symbolic = std::make_unique<SymbolicAnalysis>(sys.matrix);
    CVector x;
    try {
      const Factorization lu = factorize(sys.matrix, symbolic.get());
      x = lu.solve(sys.load);
    } catch (const SingularMatrixError& e) {
      const SmallnessReport diag = smallness_diagnostics(spec, *space);
      std::ostringstream msg;
      msg << e.what() << " in fixed-point step " << l << "; resolution indicators k(kh)^(p+1) = "
          << diag.resolution_p1 << ", k(kh)^(2p) = " << diag.resolution_2p
          << " (mesh too coarse for k, or data too large)";
      throw SingularMatrixError(msg.str());
    } catch (const DataError&) {
      trace.outcome = Outcome::Diverged;
      break;
    }
    if (!finite(x)) {
      rec.rel_residual = std::numeric_limits<double>::infinity();
      rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      trace.records.push_back(rec);
      trace.outcome = Outcome::Diverged;
      break;
    }
    rec.linear_residual = relative_residual(sys.matrix, x, sys.load);
    if (options.verify_linear_solves && !(rec.linear_residual <= options.linear_residual_limit)) {
      throw DataError("solve_nonlinear: linear solve residual " + std::to_string(rec.linear_residual) +
                      " exceeds " + std::to_string(options.linear_residual_limit));
    }

    CVector delta(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) delta[i] = x[i] - u[static_cast<int>(i)];
    rec.increment_energy = ops.energy_norm(delta, spec.k);
    if (l >= 2 && previous_increment > 0.0) rec.sigma = rec.increment_energy / previous_increment;
    previous_increment = rec.increment_energy;

    u = FeField(space, std::move(x));
    const CVector r = assemble_nonlinear_residual(ops, spec, u, load);
    rec.rel_residual = norm2(r) / scale;
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    trace.records.push_back(rec);

    if (!std::isfinite(rec.rel_residual) || !std::isfinite(rec.increment_energy)) {
      trace.outcome = Outcome::Diverged;
      break;
    }
    if (rec.rel_residual <= spec.tol) {
      trace.outcome = Outcome::Converged;
      break;
    }
  }
  return {std::move(u), std::move(trace)};
}

NonlinearSolution solve_nonlinear(const SpacePtr& space, const ProblemSpec& spec, const SolveOptions& options) {
  return solve_nonlinear(HelmholtzOperators(space), spec, options);
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace, bool include_wall_time) {
  os.precision(10);
  os << "iter,rel_residual,increment_energy,sigma,wall_ms\n";
  for (const auto& r : trace.records) {
    os << r.iter << "," << r.rel_residual << "," << r.increment_energy << ",";
    if (r.sigma) os << *r.sigma;
    os << ",";
    if (include_wall_time) os << r.wall_ms;
    os << "\n";
  }
}

SmallnessReport smallness_diagnostics(const ProblemSpec& spec, const FeSpace& space) {
  const Mesh& mesh = space.mesh();
  const int p = space.degree();
  SmallnessReport rep;
  rep.h = mesh.h();

  const BasisTable& vt = space.volume_table();
  double f2 = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (std::size_t q = 0; q < vt.rule.size(); ++q) {
      const Point xi = vt.rule.points[q];
      const double w = vt.rule.weights[q] * mesh.jacobian(t, xi).det();
      f2 += w * std::norm(source_value(spec, mesh.map(t, xi), mesh.region(t)));
    }
  }
  double g2 = 0.0;
  for (int e : mesh.boundary_edges()) {
    const Edge& edge = mesh.edges()[e];
    const int t = edge.triangles[0];
    const BasisTable& et = space.edge_table(edge.local[0]);
    const Point tangent = reference_edge_tangent(edge.local[0]);
    for (std::size_t q = 0; q < et.rule.size(); ++q) {
      const Point xi = et.rule.points[q];
      const double ds = et.rule.weights[q] * norm(mesh.jacobian(t, xi).apply(tangent));
      g2 += ds * std::norm(boundary_value(spec, mesh.map(t, xi)));
    }
  }
  rep.f_l2 = std::sqrt(f2);
  rep.g_l2 = std::sqrt(g2);
  rep.c_data = rep.f_l2 + rep.g_l2;
  // d = 2, so k^{d-2} = 1.
  rep.smallness = spec.epsilon * rep.c_data * rep.c_data;
  const int pbar = p == 1 ? 1 : 0;
  rep.smallness_log = std::pow(std::abs(std::log(rep.h)), 2 * pbar) * rep.smallness;
  rep.resolution_p1 = resolution_indicator(spec.k, rep.h, p + 1);
  rep.resolution_2p = resolution_indicator(spec.k, rep.h, 2 * p);
  return rep;
}

}  // namespace nlh
