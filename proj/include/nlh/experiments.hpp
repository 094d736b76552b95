#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlh/config.hpp"
#include "nlh/diagnostics.hpp"
#include "nlh/nonlinear_solver.hpp"

namespace nlh {

/// Nested red-refinement hierarchies of the disk mesh, one per geometric
/// degree, shared by all runs of one experiment so that error evaluation can
/// follow parent links. Geometric degree 0 means "same as the solution degree".
class MeshHierarchy {
 public:
  explicit MeshHierarchy(int geometric_degree) : q_(geometric_degree) {}
  int geometric_degree(int p) const { return q_ == 0 ? p : q_; }
  /// Mesh of level l for solution degree p; builds missing levels on demand
  /// (not thread-safe).
  const MeshPtr& level(int l, int p);

 private:
  int q_;
  std::map<int, std::vector<MeshPtr>> meshes_;  // [q][l - kBaseLevel]
};

struct LevelResult {
  int level = 0;
  double h = 0.0;
  int ndofs = 0;
  int iterations = 0;
  double final_residual = 0.0;
  Outcome outcome = Outcome::MaxIterReached;
  FieldError error;
  double linf_D = 0.0;
};

struct ConvergenceSeries {
  double k = 0.0;
  double epsilon = 0.0;
  int p = 0;
  std::vector<LevelResult> levels;

  ErrorReport report() const;
  /// Rates between consecutive levels (see fit_rates); empty for one level.
  std::vector<std::optional<double>> slopes() const;
};

struct ReferenceRun {
  double k = 0.0;
  double epsilon = 0.0;
  int level = 0;
  int p = 0;
  int ndofs = 0;
  int iterations = 0;
  double final_residual = 0.0;
  Outcome outcome = Outcome::MaxIterReached;
};

/// Smallest study discretization reaching the relative energy error target.
struct DofRow {
  double k = 0.0;
  int p = 0;
  std::optional<int> ndofs;
  std::optional<int> level;
  std::optional<double> rel_energy_err;
};

struct ConvergenceResult {
  bool exact = false;  // errors against the analytic plane wave instead of a reference
  std::vector<ConvergenceSeries> series;
  std::vector<ReferenceRun> references;
  std::vector<DofRow> dofs;  // first epsilon only
};

/// h-convergence for every (k, epsilon, p) with the first configured scheme.
/// With a plane-wave source and plane-wave impedance data the analytic
/// solution is the oracle; otherwise a (reference_level, reference_p)
/// solution per (k, epsilon). Study levels may reach reference_level for
/// degrees below reference_p. Each study level starts from the converged
/// solution one level down. Non-convergent solves are kept and flagged.
ConvergenceResult run_convergence(const RunConfig& config);

/// One fixed-point solve of the sweep.
struct SweepRun {
  double k = 0.0;
  double epsilon = 0.0;
  double f = 0.0;
  int level = 0;
  int p = 0;
  Scheme scheme = Scheme::Frozen;
  int ndofs = 0;
  double h = 0.0;
  IterationTrace trace;
};

/// Cartesian product k x epsilon x f x levels x p x schemes, in that nesting
/// order. Entries run on NLH_THREADS worker threads (default 1); the result
/// order does not depend on the thread count.
std::vector<SweepRun> run_sweep(const RunConfig& config, const std::vector<Scheme>& schemes);

/// Worker count from NLH_THREADS, at least 1.
int thread_count();

// CSV writers. Column sets are fixed.
void write_convergence_runs_csv(std::ostream& os, const ConvergenceResult& result);
void write_dofs_csv(std::ostream& os, const ConvergenceResult& result);
/// k, h_level, p, scheme, iters, final_residual, outcome
void write_iterations_csv(std::ostream& os, const std::vector<SweepRun>& runs);
/// k, epsilon, f, h_level, h, ndofs, p, scheme, iters, final_residual, outcome, avg_sigma
void write_sweep_runs_csv(std::ostream& os, const std::vector<SweepRun>& runs);
/// f, epsilon, scheme, iter, rel_residual, increment_energy, sigma
void write_contraction_traces_csv(std::ostream& os, const std::vector<SweepRun>& runs);
/// f, epsilon, scheme, iters, final_residual, outcome, avg_sigma
void write_contraction_averages_csv(std::ostream& os, const std::vector<SweepRun>& runs);

// Subcommands. Each writes into config.directory, logs progress to `log`,
// and returns a process exit code (0 ok, 3 solver divergence for `solve`).
int cmd_convergence(const RunConfig& config, std::ostream& log);
int cmd_iterations(const RunConfig& config, std::ostream& log);
int cmd_contraction(const RunConfig& config, std::ostream& log);
int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_mesh_info(const RunConfig& config, std::ostream& log);

}  // namespace nlh
