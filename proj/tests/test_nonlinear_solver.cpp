#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nlh/nonlinear_solver.hpp"

using namespace nlh;

namespace {

ProblemSpec constant_source(double k, double eps, double f, Scheme s, int max_iter = 20) {
  ProblemSpec spec;
  spec.k = k;
  spec.epsilon = eps;
  spec.source = ConstantSource{f};
  spec.scheme = s;
  spec.max_iter = max_iter;
  return spec;
}

}  // namespace

TEST(FixedPoint, LinearProblemConvergesInOneStep) {
  const SpacePtr space = make_space(disk_mesh_level(4, 2), 2);
  for (Scheme s : {Scheme::Frozen, Scheme::NewtonLike}) {
    const NonlinearSolution sol = solve_nonlinear(space, constant_source(8.0, 0.0, 50.0, s));
    EXPECT_EQ(sol.trace.outcome, Outcome::Converged);
    EXPECT_EQ(sol.trace.iterations(), 1);
    EXPECT_FALSE(sol.trace.records[0].sigma.has_value());
    EXPECT_FALSE(sol.trace.average_sigma().has_value());
  }
}

TEST(FixedPoint, FrozenCountAtModerateData) {
  const SpacePtr space = make_space(disk_mesh_level(5, 2), 2);
  const ProblemSpec spec = constant_source(8.0, 0.1, 50.0, Scheme::Frozen);
  const NonlinearSolution sol = solve_nonlinear(space, spec);
  EXPECT_EQ(sol.trace.outcome, Outcome::Converged);
  EXPECT_NEAR(sol.trace.iterations(), 15, 3);
  EXPECT_LT(sol.trace.final_residual(), 5e-7);
  // Stopping contract: the returned iterate satisfies the tolerance.
  const CVector r = assemble_nonlinear_residual(space, spec, sol.u);
  const HelmholtzOperators ops(space);
  EXPECT_LE(norm2(r) / norm2(ops.data_load(spec)), spec.tol);
}

TEST(FixedPoint, SigmaIsRatioOfIncrements) {
  const SpacePtr space = make_space(disk_mesh_level(4, 2), 2);
  const NonlinearSolution sol = solve_nonlinear(space, constant_source(8.0, 0.1, 50.0, Scheme::Frozen));
  const auto& rec = sol.trace.records;
  ASSERT_GE(rec.size(), 3u);
  for (std::size_t l = 1; l < rec.size(); ++l) {
    ASSERT_TRUE(rec[l].sigma.has_value());
    EXPECT_NEAR(*rec[l].sigma, rec[l].increment_energy / rec[l - 1].increment_energy, 1e-14);
  }
}

TEST(FixedPoint, ConvergedInitialGuessStopsAfterOneStep) {
  const SpacePtr space = make_space(disk_mesh_level(4, 2), 2);
  const ProblemSpec spec = constant_source(8.0, 0.1, 50.0, Scheme::Frozen);
  const NonlinearSolution first = solve_nonlinear(space, spec);
  SolveOptions o;
  o.initial_guess = first.u;
  const NonlinearSolution again = solve_nonlinear(space, spec, o);
  EXPECT_EQ(again.trace.outcome, Outcome::Converged);
  EXPECT_EQ(again.trace.iterations(), 1);
}

TEST(FixedPoint, LargeDataDefeatsFrozenButNotNewtonLike) {
  const SpacePtr space = make_space(disk_mesh_level(5, 2), 2);
  const HelmholtzOperators ops(space);
  const NonlinearSolution frozen = solve_nonlinear(ops, constant_source(16.0, 0.1, 150.0, Scheme::Frozen, 50));
  EXPECT_EQ(frozen.trace.outcome, Outcome::MaxIterReached);
  EXPECT_EQ(frozen.trace.iterations(), 50);
  EXPECT_GT(frozen.trace.final_residual(), 0.05);
  EXPECT_LT(frozen.trace.final_residual(), 0.5);
  const NonlinearSolution newton = solve_nonlinear(ops, constant_source(16.0, 0.1, 150.0, Scheme::NewtonLike, 50));
  EXPECT_EQ(newton.trace.outcome, Outcome::Converged);
}

TEST(FixedPoint, VerifiedLinearSolves) {
  const SpacePtr space = make_space(disk_mesh_level(4, 3), 3);
  SolveOptions o;
  o.verify_linear_solves = true;
  const NonlinearSolution sol = solve_nonlinear(space, constant_source(8.0, 0.1, 50.0, Scheme::NewtonLike), o);
  EXPECT_EQ(sol.trace.outcome, Outcome::Converged);
  EXPECT_LE(sol.trace.max_linear_residual(), 1e-10);
}

TEST(FixedPoint, InvalidSpecThrows) {
  const SpacePtr space = make_space(disk_mesh_level(2, 1), 1);
  EXPECT_THROW(solve_nonlinear(space, constant_source(0.5, 0.1, 1.0, Scheme::Frozen)), ArgumentError);
  EXPECT_THROW(solve_nonlinear(space, constant_source(8.0, -0.1, 1.0, Scheme::Frozen)), ArgumentError);
  EXPECT_THROW(solve_nonlinear(space, constant_source(8.0, 0.1, 1.0, Scheme::Frozen, 0)), ArgumentError);
}

TEST(Trace, CsvLeavesUndefinedSigmaEmpty) {
  IterationTrace t;
  t.records.push_back({1, 0.5, 2.0, std::nullopt, 3.0, 1e-15});
  t.records.push_back({2, 0.25, 1.0, 0.5, 4.0, 1e-15});
  std::ostringstream with, without;
  write_trace_csv(with, t);
  write_trace_csv(without, t, false);
  EXPECT_EQ(with.str(), "iter,rel_residual,increment_energy,sigma,wall_ms\n1,0.5,2,,3\n2,0.25,1,0.5,4\n");
  // The column set is fixed; only the wall-time cells are left blank.
  EXPECT_EQ(without.str(), "iter,rel_residual,increment_energy,sigma,wall_ms\n1,0.5,2,,\n2,0.25,1,0.5,\n");
  EXPECT_EQ(to_string(Outcome::MaxIterReached), "MAX_ITER_REACHED");
  EXPECT_DOUBLE_EQ(*t.average_sigma(), 0.5);
  EXPECT_DOUBLE_EQ(t.final_residual(), 0.25);
}

TEST(Smallness, ZeroEpsilonGivesZero) {
  const SpacePtr space = make_space(disk_mesh_level(3, 2), 2);
  const SmallnessReport r = smallness_diagnostics(constant_source(8.0, 0.0, 50.0, Scheme::Frozen), *space);
  EXPECT_EQ(r.smallness, 0.0);
  EXPECT_EQ(r.smallness_log, 0.0);
}

TEST(Smallness, ResolutionIndicatorArithmetic) {
  EXPECT_DOUBLE_EQ(resolution_indicator(8.0, 1.0 / 16.0, 4), 0.5);
}

TEST(Smallness, ConstantDataNorm) {
  const SpacePtr space = make_space(disk_mesh_level(4, 3), 3);
  const SmallnessReport r = smallness_diagnostics(constant_source(8.0, 0.1, 50.0, Scheme::Frozen), *space);
  EXPECT_NEAR(r.c_data, 50.0 * std::sqrt(kPi), 1e-5);
  EXPECT_EQ(r.g_l2, 0.0);
  EXPECT_NEAR(r.smallness, 0.1 * r.c_data * r.c_data, 1e-9);
}
