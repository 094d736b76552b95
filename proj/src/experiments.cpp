#include "nlh/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "nlh/output.hpp"

#ifndef NLH_VERSION
#define NLH_VERSION "unknown"
#endif

namespace nlh {

const MeshPtr& MeshHierarchy::level(int l, int p) {
  if (l < kBaseLevel) throw ArgumentError("MeshHierarchy: levels start at " + std::to_string(kBaseLevel));
  const int q = geometric_degree(p);
  auto& chain = meshes_[q];
  if (chain.empty()) chain.push_back(disk_mesh_level(kBaseLevel, q));
  while (static_cast<int>(chain.size()) <= l - kBaseLevel) chain.push_back(refine(chain.back()));
  return chain[static_cast<std::size_t>(l - kBaseLevel)];
}

ErrorReport ConvergenceSeries::report() const {
  ErrorReport r;
  for (const auto& l : levels) {
    r.rows.push_back({l.level, l.h, l.ndofs, l.error.energy_rel, l.error.l2_rel, l.error.energy_abs, l.error.l2_abs,
                      l.linf_D});
  }
  return r;
}

std::vector<std::optional<double>> ConvergenceSeries::slopes() const {
  if (levels.size() < 2) return {};
  return fit_rates(report());
}

int thread_count() {
  const char* env = std::getenv("NLH_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return std::max(1, n);
}

namespace {

template <class F>
void parallel_for(std::size_t n, F&& body) {
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Interpolates a field into a space on the red refinement of its mesh by
// evaluating the parent element at each child node.
FeField prolongate(const FeField& coarse, const SpacePtr& fine) {
  const Mesh& fm = fine->mesh();
  if (fm.coarser().get() != &coarse.space().mesh()) throw ArgumentError("prolongate: meshes are not nested");
  FeField out(fine);
  const auto& nodes = fine->element().nodes();
  for (int t = 0; t < fm.num_triangles(); ++t) {
    const ParentLink& link = fm.parent(t);
    const auto d = fine->dofs(t);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.coefficients()[d[i]] = coarse.local_value(link.triangle, link.to_parent(nodes[i])).value;
    }
  }
  return out;
}

// Reference solution by nested iteration: a discrete solution one level
// down, prolongated, starts the fixed-point iteration on the reference level.
// Only the cost changes; the stopping test is the same.
NonlinearSolution solve_reference(MeshHierarchy& meshes, const RunConfig& config, const ProblemSpec& spec,
                                  SolveOptions options, const FeField* coarse) {
  const SpacePtr space = make_space(meshes.level(config.reference_level, config.reference_p), config.reference_p);
  std::optional<NonlinearSolution> own;
  if (coarse == nullptr && config.reference_level > kBaseLevel) {
    own = solve_nonlinear(make_space(meshes.level(config.reference_level - 1, config.reference_p), config.reference_p), spec, options);
    if (own->trace.outcome == Outcome::Converged) coarse = &own->u;
  }
  if (coarse != nullptr) options.initial_guess = prolongate(*coarse, space);
  return solve_nonlinear(space, spec, options);
}

bool has_exact_solution(const RunConfig& c) {
  return c.source == SourceKind::PlaneWave && c.boundary == BoundaryKind::PlaneWave;
}

SolveOptions options_for(const RunConfig& c) {
  SolveOptions o;
  o.verify_linear_solves = o.verify_linear_solves || c.verify_linear_solves;
  return o;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string path_in(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.directory) / name).string();
}

void write_manifest(const RunConfig& c, const std::string& command, const std::vector<std::string>& notes) {
  write_file_atomic(path_in(c, "manifest.txt"), [&](std::ostream& os) {
    os << "# nlh run manifest\n# command: " << command << "\n# version: " << NLH_VERSION << "\n";
    for (const auto& n : notes) os << "# " << n << "\n";
    os << "# rerun: nlh " << command << " --config manifest.txt\n\n";
    write_config(os, c);
  });
}

std::vector<std::string> mesh_notes(const RunConfig& c, const std::vector<int>& levels) {
  MeshHierarchy meshes(c.geometric_degree);
  std::vector<std::string> notes;
  for (int l : levels) {
    const Mesh& m = *meshes.level(l, c.p.front());
    notes.push_back("mesh level " + std::to_string(l) + ": h = " + num(m.h()) + ", triangles = " +
                    std::to_string(m.num_triangles()) + ", vertices = " + std::to_string(m.num_vertices()));
  }
  return notes;
}

}  // namespace

ConvergenceResult run_convergence(const RunConfig& config) {
  ConvergenceResult result;
  result.exact = has_exact_solution(config);
  const Scheme scheme = config.schemes.front();
  const double f = config.f.front();
  const int finest = config.levels.back();
  if (!result.exact && config.reference_level < finest) {
    throw ConfigError("discretization.reference_level must not be coarser than a study level");
  }
  // On the reference level itself only degrees below reference_p are studied.
  const auto studied = [&](int l, int p) {
    return result.exact || l < config.reference_level || p < config.reference_p;
  };
  MeshHierarchy meshes(config.geometric_degree);
  const SolveOptions options = options_for(config);

  for (double k : config.k) {
    for (double eps : config.epsilon) {
      const ProblemSpec spec = config.problem(k, eps, f, scheme);
      // [p index] -> (level, solution), levels ascending. Each level starts
      // from the prolongated converged solution one level down.
      std::vector<std::vector<std::pair<int, NonlinearSolution>>> solutions;
      for (int p : config.p) {
        auto& row = solutions.emplace_back();
        for (int l : config.levels) {
          if (!studied(l, p)) continue;
          const SpacePtr space = make_space(meshes.level(l, p), p);
          SolveOptions o = options;
          if (!row.empty() && row.back().first == l - 1 && row.back().second.trace.outcome == Outcome::Converged) {
            o.initial_guess = prolongate(row.back().second.u, space);
          }
          row.emplace_back(l, solve_nonlinear(space, spec, o));
        }
      }
      const FeField* nested = nullptr;
      for (std::size_t pi = 0; pi < config.p.size(); ++pi) {
        for (const auto& [l, sol] : solutions[pi]) {
          if (config.p[pi] == config.reference_p && l == config.reference_level - 1 &&
              sol.trace.outcome == Outcome::Converged) {
            nested = &sol.u;
          }
        }
      }
      std::optional<NonlinearSolution> reference;
      if (!result.exact) {
        reference = solve_reference(meshes, config, spec, options, nested);
        result.references.push_back({k, eps, config.reference_level, config.reference_p,
                                     reference->u.space().n_dofs(), reference->trace.iterations(),
                                     reference->trace.final_residual(), reference->trace.outcome});
      }
      const PlaneWave wave{k, config.direction};
      const ExactSolution exact{[&](Point x) { return wave.value(x); },
                                [&](Point x) { return wave.gradient(x); }};
      for (std::size_t pi = 0; pi < config.p.size(); ++pi) {
        ConvergenceSeries series{k, eps, config.p[pi], {}};
        for (const auto& [l, sol] : solutions[pi]) {
          LevelResult r;
          r.level = l;
          r.h = sol.u.space().mesh().h();
          r.ndofs = sol.u.space().n_dofs();
          r.iterations = sol.trace.iterations();
          r.final_residual = sol.trace.final_residual();
          r.outcome = sol.trace.outcome;
          r.error = result.exact ? error_vs_exact(sol.u, exact, k) : error_vs_reference(sol.u, reference->u, k);
          r.linf_D = linf_on_D(sol.u);
          series.levels.push_back(r);
        }
        result.series.push_back(std::move(series));
      }
    }
  }

  const double eps0 = config.epsilon.front();
  for (const auto& s : result.series) {
    if (s.epsilon != eps0) continue;
    DofRow row{s.k, s.p, {}, {}, {}};
    for (const auto& l : s.levels) {
      if (l.error.energy_rel < config.dof_target) {
        row.ndofs = l.ndofs;
        row.level = l.level;
        row.rel_energy_err = l.error.energy_rel;
        break;
      }
    }
    result.dofs.push_back(row);
  }
  return result;
}

std::vector<SweepRun> run_sweep(const RunConfig& config, const std::vector<Scheme>& schemes) {
  std::vector<SweepRun> runs;
  for (double k : config.k)
    for (double eps : config.epsilon)
      for (double f : config.f)
        for (int l : config.levels)
          for (int p : config.p)
            for (Scheme s : schemes) runs.push_back({k, eps, f, l, p, s, 0, 0.0, {}});

  MeshHierarchy meshes(config.geometric_degree);
  // One space (and operator set) per (level, p), shared read-only by the runs.
  std::map<std::pair<int, int>, std::shared_ptr<const HelmholtzOperators>> ops;
  for (const auto& r : runs) {
    auto& slot = ops[{r.level, r.p}];
    if (!slot) slot = std::make_shared<const HelmholtzOperators>(make_space(meshes.level(r.level, r.p), r.p));
  }
  const SolveOptions options = options_for(config);
  parallel_for(runs.size(), [&](std::size_t i) {
    SweepRun& r = runs[i];
    const HelmholtzOperators& op = *ops.at({r.level, r.p});
    const NonlinearSolution sol = solve_nonlinear(op, config.problem(r.k, r.epsilon, r.f, r.scheme), options);
    r.ndofs = op.space().n_dofs();
    r.h = op.space().mesh().h();
    r.trace = sol.trace;
  });
  return runs;
}

void write_convergence_runs_csv(std::ostream& os, const ConvergenceResult& result) {
  os.precision(10);
  os << "k,epsilon,p,level,h,ndofs,iters,final_residual,outcome,rel_energy_err,abs_energy_err,rel_l2_err,linf_D\n";
  for (const auto& s : result.series) {
    for (const auto& l : s.levels) {
      os << s.k << "," << s.epsilon << "," << s.p << "," << l.level << "," << l.h << "," << l.ndofs << ","
         << l.iterations << "," << l.final_residual << "," << to_string(l.outcome) << "," << l.error.energy_rel << ","
         << l.error.energy_abs << "," << l.error.l2_rel << "," << l.linf_D << "\n";
    }
  }
}

void write_dofs_csv(std::ostream& os, const ConvergenceResult& result) {
  os.precision(10);
  os << "k,p,ndofs,level,rel_energy_err\n";
  for (const auto& d : result.dofs) {
    os << d.k << "," << d.p << ",";
    if (d.ndofs) os << *d.ndofs;
    os << ",";
    if (d.level) os << *d.level;
    os << ",";
    if (d.rel_energy_err) os << *d.rel_energy_err;
    os << "\n";
  }
}

void write_iterations_csv(std::ostream& os, const std::vector<SweepRun>& runs) {
  os.precision(10);
  os << "k,h_level,p,scheme,iters,final_residual,outcome\n";
  for (const auto& r : runs) {
    os << r.k << "," << r.level << "," << r.p << "," << to_string(r.scheme) << "," << r.trace.iterations() << ","
       << r.trace.final_residual() << "," << to_string(r.trace.outcome) << "\n";
  }
}

void write_sweep_runs_csv(std::ostream& os, const std::vector<SweepRun>& runs) {
  os.precision(10);
  os << "k,epsilon,f,h_level,h,ndofs,p,scheme,iters,final_residual,outcome,avg_sigma\n";
  for (const auto& r : runs) {
    os << r.k << "," << r.epsilon << "," << r.f << "," << r.level << "," << r.h << "," << r.ndofs << "," << r.p
       << "," << to_string(r.scheme) << "," << r.trace.iterations() << "," << r.trace.final_residual() << ","
       << to_string(r.trace.outcome) << ",";
    if (auto s = r.trace.average_sigma()) os << *s;
    os << "\n";
  }
}

void write_contraction_traces_csv(std::ostream& os, const std::vector<SweepRun>& runs) {
  os.precision(10);
  os << "f,epsilon,scheme,iter,rel_residual,increment_energy,sigma\n";
  for (const auto& r : runs) {
    for (const auto& rec : r.trace.records) {
      os << r.f << "," << r.epsilon << "," << to_string(r.scheme) << "," << rec.iter << "," << rec.rel_residual
         << "," << rec.increment_energy << ",";
      if (rec.sigma) os << *rec.sigma;
      os << "\n";
    }
  }
}

void write_contraction_averages_csv(std::ostream& os, const std::vector<SweepRun>& runs) {
  os.precision(10);
  os << "f,epsilon,scheme,iters,final_residual,outcome,avg_sigma\n";
  for (const auto& r : runs) {
    os << r.f << "," << r.epsilon << "," << to_string(r.scheme) << "," << r.trace.iterations() << ","
       << r.trace.final_residual() << "," << to_string(r.trace.outcome) << ",";
    if (auto s = r.trace.average_sigma()) os << *s;
    os << "\n";
  }
}

namespace {

std::string tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<std::string> outcome_notes(const std::vector<SweepRun>& runs) {
  std::map<std::string, int> counts;
  for (const auto& r : runs) ++counts[to_string(r.trace.outcome)];
  std::vector<std::string> notes;
  for (const auto& [name, n] : counts) notes.push_back("outcome " + name + ": " + std::to_string(n) + " runs");
  return notes;
}

}  // namespace

int cmd_convergence(const RunConfig& config, std::ostream& log) {
  const ConvergenceResult result = run_convergence(config);
  for (const auto& s : result.series) {
    const std::string stem = "convergence_k" + tag(s.k) + "_eps" + tag(s.epsilon) + "_p" + std::to_string(s.p);
    write_file_atomic(path_in(config, stem + ".csv"),
                      [&](std::ostream& os) { write_error_report_csv(os, s.report()); });
    log << stem << ":";
    for (const auto& sl : s.slopes()) log << " " << (sl ? num(*sl) : std::string("-"));
    log << "\n";
  }
  write_file_atomic(path_in(config, "convergence_runs.csv"),
                    [&](std::ostream& os) { write_convergence_runs_csv(os, result); });
  write_file_atomic(path_in(config, "dofs_to_target.csv"), [&](std::ostream& os) { write_dofs_csv(os, result); });
  if (config.emit_svg) {
    std::map<std::pair<double, double>, std::vector<PlotSeries>> plots;
    for (const auto& s : result.series) {
      PlotSeries ps{"p = " + std::to_string(s.p), {}, {}};
      for (const auto& l : s.levels) {
        ps.x.push_back(l.h);
        ps.y.push_back(l.error.energy_rel);
      }
      plots[{s.k, s.epsilon}].push_back(std::move(ps));
    }
    for (const auto& [key, series] : plots) {
      const std::string name = "convergence_k" + tag(key.first) + "_eps" + tag(key.second) + ".svg";
      write_file_atomic(path_in(config, name), [&](std::ostream& os) {
        write_loglog_svg(os, "k = " + tag(key.first) + ", epsilon = " + tag(key.second), "h",
                         "relative error in the k-weighted energy norm", series);
      });
    }
  }
  std::vector<std::string> notes = mesh_notes(config, config.levels);
  for (const auto& r : result.references) {
    notes.push_back("reference k = " + tag(r.k) + ", epsilon = " + tag(r.epsilon) + ": level " +
                    std::to_string(r.level) + ", p = " + std::to_string(r.p) + ", ndofs = " +
                    std::to_string(r.ndofs) + ", " + to_string(r.outcome) + " after " +
                    std::to_string(r.iterations) + " iterations");
  }
  int flagged = 0;
  for (const auto& s : result.series) {
    for (const auto& l : s.levels) flagged += l.outcome != Outcome::Converged;
  }
  notes.push_back("non-converged study solves: " + std::to_string(flagged));
  write_manifest(config, "convergence", notes);
  return 0;
}

int cmd_iterations(const RunConfig& config, std::ostream& log) {
  const auto runs = run_sweep(config, config.schemes);
  write_file_atomic(path_in(config, "iterations.csv"), [&](std::ostream& os) { write_iterations_csv(os, runs); });
  write_file_atomic(path_in(config, "iterations_runs.csv"), [&](std::ostream& os) { write_sweep_runs_csv(os, runs); });
  for (const auto& r : runs) {
    log << "k=" << r.k << " level=" << r.level << " p=" << r.p << " " << to_string(r.scheme) << ": "
        << r.trace.iterations() << " iterations, " << to_string(r.trace.outcome) << "\n";
  }
  auto notes = mesh_notes(config, config.levels);
  const auto outcomes = outcome_notes(runs);
  notes.insert(notes.end(), outcomes.begin(), outcomes.end());
  write_manifest(config, "iterations", notes);
  return 0;
}

int cmd_contraction(const RunConfig& config, std::ostream& log) {
  const auto runs = run_sweep(config, {Scheme::Frozen, Scheme::NewtonLike});
  write_file_atomic(path_in(config, "contraction_traces.csv"),
                    [&](std::ostream& os) { write_contraction_traces_csv(os, runs); });
  write_file_atomic(path_in(config, "contraction_averages.csv"),
                    [&](std::ostream& os) { write_contraction_averages_csv(os, runs); });
  write_file_atomic(path_in(config, "contraction_runs.csv"), [&](std::ostream& os) { write_sweep_runs_csv(os, runs); });
  for (const auto& r : runs) {
    const auto s = r.trace.average_sigma();
    log << "f=" << r.f << " epsilon=" << r.epsilon << " " << to_string(r.scheme) << ": " << to_string(r.trace.outcome)
        << ", average sigma " << (s ? num(*s) : std::string("undefined")) << "\n";
  }
  auto notes = mesh_notes(config, config.levels);
  const auto outcomes = outcome_notes(runs);
  notes.insert(notes.end(), outcomes.begin(), outcomes.end());
  write_manifest(config, "contraction", notes);
  return 0;
}

int cmd_solve(const RunConfig& config, std::ostream& log) {
  const int level = config.levels.front();
  const int p = config.p.front();
  const ProblemSpec spec =
      config.problem(config.k.front(), config.epsilon.front(), config.f.front(), config.schemes.front());
  const MeshPtr mesh = disk_mesh_level(level, MeshHierarchy(config.geometric_degree).geometric_degree(p));
  const SpacePtr space = make_space(mesh, p);
  const NonlinearSolution sol = solve_nonlinear(space, spec, options_for(config));

  write_file_atomic(path_in(config, "trace.csv"),
                    [&](std::ostream& os) { write_trace_csv(os, sol.trace, config.wall_time); });
  write_file_atomic(path_in(config, "mesh.txt"), [&](std::ostream& os) { write_mesh(os, *mesh); });
  write_file_atomic(path_in(config, "solution.txt"), [&](std::ostream& os) { write_solution_text(os, sol.u); });

  const SmallnessReport diag = smallness_diagnostics(spec, *space);
  std::vector<std::string> notes{
      "mesh level " + std::to_string(level) + ": h = " + num(mesh->h()) + ", triangles = " +
          std::to_string(mesh->num_triangles()) + ", ndofs = " + std::to_string(space->n_dofs()),
      "outcome: " + to_string(sol.trace.outcome) + " after " + std::to_string(sol.trace.iterations()) +
          " iterations, final residual " + num(sol.trace.final_residual()),
      "C_data = " + num(diag.c_data) + ", epsilon C_data^2 = " + num(diag.smallness) +
          ", |ln h|^(2 pbar) epsilon C_data^2 = " + num(diag.smallness_log),
      "k(kh)^(p+1) = " + num(diag.resolution_p1) + ", k(kh)^(2p) = " + num(diag.resolution_2p),
      "max |u| on D (sampled) = " + num(linf_on_D(sol.u)) + ", energy norm = " + num(energy_norm(sol.u, spec.k))};
  write_manifest(config, "solve", notes);
  log << to_string(sol.trace.outcome) << " after " << sol.trace.iterations() << " iterations, final residual "
      << sol.trace.final_residual() << "\n";
  return sol.trace.outcome == Outcome::Converged ? 0 : 3;
}

int cmd_mesh_info(const RunConfig& config, std::ostream& log) {
  MeshHierarchy meshes(config.geometric_degree);
  write_file_atomic(path_in(config, "mesh_info.csv"), [&](std::ostream& os) {
    os.precision(10);
    os << "level,h,triangles,vertices,p,geometric_degree,ndofs,area\n";
    for (int l : config.levels) {
      for (int p : config.p) {
        const MeshPtr& m = meshes.level(l, p);
        const FeSpace space(m, p);
        os << l << "," << m->h() << "," << m->num_triangles() << "," << m->num_vertices() << "," << p << ","
           << m->geometric_degree() << "," << space.n_dofs() << "," << m->area() << "\n";
        log << "level " << l << " p " << p << ": h = " << m->h() << ", triangles = " << m->num_triangles()
            << ", ndofs = " << space.n_dofs() << "\n";
      }
    }
  });
  return 0;
}

}  // namespace nlh
