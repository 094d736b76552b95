#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlh/experiments.hpp"
#include "nlh/output.hpp"

using namespace nlh;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  return line;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nlh_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Runs the CLI; returns its exit code and leaves stderr in dir/stderr.txt.
int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd =
      std::string(NLH_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, Defaults) {
  const RunConfig c = parse_config_text("");
  EXPECT_EQ(c.k, std::vector<double>{8.0});
  EXPECT_EQ(c.p, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(c.source, SourceKind::Bump);
  EXPECT_EQ(c.geometric_degree, 0);
  EXPECT_DOUBLE_EQ(c.tol, 5e-7);
  EXPECT_EQ(c.max_iter, 20);
}

TEST(Config, SectionsListsCommentsAndOverrides) {
  const RunConfig c = parse_config_text(
      "# comment\n[problem]\nk = 8, 16 ; trailing\nsource = constant\nf = 150\n"
      "[solver]\nscheme = frozen, newtonlike\nmax_iter = 50\n",
      {"problem.k=32", "discretization.levels=5"});
  EXPECT_EQ(c.k, std::vector<double>{32.0});
  EXPECT_EQ(c.source, SourceKind::Constant);
  EXPECT_EQ(c.f, std::vector<double>{150.0});
  EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::Frozen, Scheme::NewtonLike}));
  EXPECT_EQ(c.levels, std::vector<int>{5});
  EXPECT_EQ(c.max_iter, 50);
}

TEST(Config, UnknownKeyNamed) {
  try {
    parse_config_text("[solver]\nbogus = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("[nowhere]\nk = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("", {"problem.kk=1"}), ConfigError);
}

TEST(Config, InvalidValuesRejected) {
  for (const char* bad : {"[problem]\nk = 0.5\n", "[problem]\nepsilon = -1\n", "[discretization]\np = 5\n",
                          "[discretization]\nlevels = 4, 3\n", "[solver]\ntol = 0\n", "[solver]\nmax_iter = 0\n",
                          "[problem]\nsource = lamp\n", "[problem]\nk = eight\n", "k = 8\n"}) {
    EXPECT_THROW(parse_config_text(bad), ConfigError) << bad;
  }
}

TEST(Config, RoundTrip) {
  RunConfig c = parse_config_text("", {"problem.k=8,16,32", "problem.epsilon=0.05", "problem.source=planewave",
                                       "problem.boundary=planewave", "problem.direction=0.6,0.8",
                                       "discretization.geometric_degree=3", "solver.scheme=newtonlike",
                                       "output.directory=some/where", "output.emit_svg=false"});
  std::ostringstream os;
  write_config(os, c);
  const RunConfig back = parse_config_text(os.str());
  std::ostringstream again;
  write_config(again, back);
  EXPECT_EQ(os.str(), again.str());
  EXPECT_EQ(back.k, c.k);
  EXPECT_EQ(back.geometric_degree, 3);
  EXPECT_EQ(back.directory, "some/where");
  EXPECT_FALSE(back.emit_svg);
}

TEST(CsvHeaders, Golden) {
  const ConvergenceResult empty;
  const std::vector<SweepRun> none;
  std::ostringstream a, b, c, d, e, f;
  write_convergence_runs_csv(a, empty);
  write_dofs_csv(b, empty);
  write_iterations_csv(c, none);
  write_sweep_runs_csv(d, none);
  write_contraction_traces_csv(e, none);
  write_contraction_averages_csv(f, none);
  EXPECT_EQ(a.str(), "k,epsilon,p,level,h,ndofs,iters,final_residual,outcome,rel_energy_err,abs_energy_err,rel_l2_err,linf_D\n");
  EXPECT_EQ(b.str(), "k,p,ndofs,level,rel_energy_err\n");
  EXPECT_EQ(c.str(), "k,h_level,p,scheme,iters,final_residual,outcome\n");
  EXPECT_EQ(d.str(), "k,epsilon,f,h_level,h,ndofs,p,scheme,iters,final_residual,outcome,avg_sigma\n");
  EXPECT_EQ(e.str(), "f,epsilon,scheme,iter,rel_residual,increment_energy,sigma\n");
  EXPECT_EQ(f.str(), "f,epsilon,scheme,iters,final_residual,outcome,avg_sigma\n");
}

TEST(Sweep, ZeroEpsilonCountsAreOneAndSigmaEmpty) {
  const RunConfig c = parse_config_text("", {"problem.k=8,16", "problem.epsilon=0", "problem.source=constant",
                                             "discretization.p=2", "discretization.levels=3,4"});
  const auto runs = run_sweep(c, {Scheme::Frozen, Scheme::NewtonLike});
  ASSERT_EQ(runs.size(), 8u);
  for (const auto& r : runs) EXPECT_EQ(r.trace.iterations(), 1);
  std::ostringstream os;
  write_contraction_traces_csv(os, runs);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) EXPECT_EQ(line.back(), ',') << line;
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  const RunConfig c = parse_config_text("", {"problem.k=8,16", "problem.epsilon=0.1", "problem.source=constant",
                                             "discretization.p=1,2", "discretization.levels=3"});
  ::setenv("NLH_THREADS", "1", 1);
  const auto serial = run_sweep(c, {Scheme::Frozen});
  ::setenv("NLH_THREADS", "3", 1);
  const auto threaded = run_sweep(c, {Scheme::Frozen});
  ::unsetenv("NLH_THREADS");
  std::ostringstream a, b;
  write_sweep_runs_csv(a, serial);
  write_sweep_runs_csv(b, threaded);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Convergence, ManufacturedSlopeAndSingleLevel) {
  const RunConfig c = parse_config_text("", {"problem.epsilon=0", "problem.source=planewave", "problem.boundary=planewave",
                                             "discretization.p=2", "discretization.levels=5,6"});
  const ConvergenceResult r = run_convergence(c);
  ASSERT_TRUE(r.exact);
  ASSERT_EQ(r.series.size(), 1u);
  EXPECT_NEAR(*r.series[0].slopes()[0], 2.0, 0.3);

  const RunConfig one = parse_config_text("", {"problem.epsilon=0", "problem.source=planewave",
                                               "problem.boundary=planewave", "discretization.p=1",
                                               "discretization.levels=3"});
  std::ostringstream os;
  write_error_report_csv(os, run_convergence(one).series[0].report());
  std::istringstream is(os.str());
  std::string header, row, extra;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_FALSE(std::getline(is, extra));
  EXPECT_EQ(row.back(), ',');
}

TEST(Convergence, ReferenceMustBeFinest) {
  const RunConfig c = parse_config_text("", {"discretization.levels=3,4", "discretization.reference_level=3"});
  EXPECT_THROW(run_convergence(c), ConfigError);
}

TEST(Output, AtomicWriteAndSvg) {
  const fs::path d = scratch("output");
  const fs::path f = d / "nested" / "plot.svg";
  write_file_atomic(f.string(), [](std::ostream& os) {
    write_loglog_svg(os, "t", "h", "err", {{"a", {0.5, 0.25}, {1e-1, 1e-2}}, {"b", {0.5, -1.0}, {1e-3, 1e-4}}});
  });
  const std::string svg = slurp(f);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_FALSE(fs::exists(f.string() + ".tmp"));
}

TEST(Cli, SolveWritesItsFiles) {
  const fs::path d = scratch("solve_ok");
  const fs::path cfg = d / "run.ini";
  std::ofstream(cfg) << "[problem]\nk = 8\nepsilon = 0.1\nsource = constant\nf = 50\n"
                        "[discretization]\np = 2\nlevels = 4\n";
  EXPECT_EQ(run_cli(d, "solve -c " + cfg.string() + " -o " + (d / "out").string()), 0);
  for (const char* name : {"trace.csv", "mesh.txt", "solution.txt", "manifest.txt"})
    EXPECT_TRUE(fs::exists(d / "out" / name)) << name;
  EXPECT_EQ(first_line(d / "out" / "trace.csv"), "iter,rel_residual,increment_energy,sigma,wall_ms");
  EXPECT_NE(slurp(d / "out" / "manifest.txt").find("CONVERGED"), std::string::npos);
}

TEST(Cli, UnknownKeyExitsTwo) {
  const fs::path d = scratch("solve_badkey");
  EXPECT_EQ(run_cli(d, "solve --set solver.frobnicate=1 -o " + (d / "out").string()), 2);
  EXPECT_NE(slurp(d / "stderr.txt").find("frobnicate"), std::string::npos);
  EXPECT_EQ(run_cli(d, "solve --no-such-flag"), 2);
  EXPECT_EQ(run_cli(d, "solve -c " + (d / "missing.ini").string()), 2);
}

TEST(Cli, NonConvergedSolveExitsThree) {
  const fs::path d = scratch("solve_maxiter");
  EXPECT_EQ(run_cli(d, "solve -o " + (d / "out").string() +
                           " --set problem.k=16 problem.epsilon=0.1 problem.source=constant problem.f=150"
                           " discretization.p=2 discretization.levels=5 solver.scheme=frozen solver.max_iter=50"),
            3);
  EXPECT_NE(slurp(d / "out" / "manifest.txt").find("MAX_ITER_REACHED after 50 iterations"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "out" / "trace.csv"));
}

TEST(Cli, IterationsAreDeterministic) {
  const fs::path d = scratch("iterations");
  const std::string set = " --set problem.k=8,16 problem.epsilon=0.1 problem.source=constant discretization.p=2"
                          " discretization.levels=3,4";
  ASSERT_EQ(run_cli(d, "iterations -o " + (d / "a").string() + set), 0);
  ASSERT_EQ(run_cli(d, "iterations -o " + (d / "b").string() + set), 0);
  EXPECT_EQ(first_line(d / "a" / "iterations.csv"), "k,h_level,p,scheme,iters,final_residual,outcome");
  EXPECT_EQ(slurp(d / "a" / "iterations.csv"), slurp(d / "b" / "iterations.csv"));
  EXPECT_EQ(slurp(d / "a" / "iterations_runs.csv"), slurp(d / "b" / "iterations_runs.csv"));
}

TEST(Cli, MeshInfoAndHelp) {
  const fs::path d = scratch("mesh_info");
  EXPECT_EQ(run_cli(d, "mesh-info -o " + d.string() + " --set discretization.levels=2,3 discretization.p=1,2"), 0);
  EXPECT_EQ(first_line(d / "mesh_info.csv"), "level,h,triangles,vertices,p,geometric_degree,ndofs,area");
  EXPECT_EQ(run_cli(d, "--help"), 0);
  EXPECT_EQ(run_cli(d, ""), 2);
}
