#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlh/assembly.hpp"

namespace nlh {

enum class Outcome { Converged, MaxIterReached, Diverged };

std::string to_string(Outcome o);

struct IterationRecord {
  int iter = 0;
  double rel_residual = 0.0;      // ||r(u^l)||_2 / ||F + G||_2, true nonlinear residual
  double increment_energy = 0.0;  // ||u^l - u^{l-1}||_{1,k}
  std::optional<double> sigma;    // increment(l) / increment(l-1), l >= 2
  double wall_ms = 0.0;
  double linear_residual = 0.0;   // ||M x - b|| / ||b|| of the linear solve
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  Outcome outcome = Outcome::MaxIterReached;

  int iterations() const { return static_cast<int>(records.size()); }
  double final_residual() const;
  double max_linear_residual() const;
  /// Mean of all recorded contraction factors; nullopt if none is defined.
  std::optional<double> average_sigma() const;
};

struct SolveOptions {
  /// u^(0); zero when absent.
  std::optional<FeField> initial_guess;
  /// Throw DataError when a linear solve misses `linear_residual_limit`.
  /// Defaults to on in debug builds or when NLH_VERIFY_SOLVES is set.
  bool verify_linear_solves = default_verify();
  double linear_residual_limit = 1e-10;

  static bool default_verify();
};

struct NonlinearSolution {
  FeField u;
  IterationTrace trace;
};

/// Fixed-point iteration: each step solves the system linearized around the
/// previous iterate (FROZEN or NEWTONLIKE weights per spec.scheme) and stops
/// once the true nonlinear residual drops below spec.tol or after
/// spec.max_iter steps. A non-finite iterate ends the run as Diverged. A
/// singular factorization is rethrown as SingularMatrixError with the
/// resolution indicators in the message.
NonlinearSolution solve_nonlinear(const HelmholtzOperators& ops, const ProblemSpec& spec,
                                  const SolveOptions& options = {});
NonlinearSolution solve_nonlinear(const SpacePtr& space, const ProblemSpec& spec,
                                  const SolveOptions& options = {});

/// Columns: iter, rel_residual, increment_energy, sigma, wall_ms.
void write_trace_csv(std::ostream& os, const IterationTrace& trace, bool include_wall_time = true);

/// k (k h)^exponent.
double resolution_indicator(double k, double h, int exponent);

struct SmallnessReport {
  double f_l2 = 0.0;
  double g_l2 = 0.0;
  double c_data = 0.0;              // ||f||_0 + ||g||_{L2(Γ)}
  double smallness = 0.0;           // ε k^{d-2} C_data^2, d = 2
  double smallness_log = 0.0;       // |ln h|^{2 p̄} ε k^{d-2} C_data^2
  double resolution_p1 = 0.0;       // k (k h)^{p+1}
  double resolution_2p = 0.0;       // k (k h)^{2p}
  double h = 0.0;
};

SmallnessReport smallness_diagnostics(const ProblemSpec& spec, const FeSpace& space);

}  // namespace nlh
