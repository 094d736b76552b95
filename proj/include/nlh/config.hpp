#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlh/problem.hpp"

namespace nlh {

/// Malformed or invalid configuration; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SourceKind { Bump, Constant, PlaneWave };
enum class BoundaryKind { Zero, PlaneWave };

/// Resolved run configuration. Lists drive parameter sweeps; single-run
/// commands use the first entry of each list.
///
/// Text format (one entry per line):
///
///     # comment            (also ';')
///     [section]
///     key = value          lists are comma separated
///
/// Sections and keys (defaults in brackets):
///
///     [problem]        k [8], epsilon [0.01], source [bump] (bump|constant|planewave),
///                      f [50] (constant source values), boundary [zero] (zero|planewave),
///                      direction [1, 0] (plane-wave direction, normalized)
///     [discretization] p [1, 2, 3], levels [2, 3, 4, 5], geometric_degree [auto]
///                      (auto = solution degree p, or a fixed 1..4),
///                      reference_level [6], reference_p [3]
///     [solver]         scheme [frozen] (list of frozen|newtonlike), tol [5e-7],
///                      max_iter [20], verify_linear_solves [false]
///     [output]         directory [out], emit_svg [true], wall_time [true],
///                      dof_target [0.06]
///
/// Unknown sections or keys are rejected. Runs are deterministic: there is
/// no random seed anywhere.
struct RunConfig {
  std::vector<double> k{8.0};
  std::vector<double> epsilon{0.01};
  SourceKind source = SourceKind::Bump;
  std::vector<double> f{50.0};
  BoundaryKind boundary = BoundaryKind::Zero;
  Point direction{1.0, 0.0};

  std::vector<int> p{1, 2, 3};
  std::vector<int> levels{2, 3, 4, 5};
  int geometric_degree = 0;  // 0: same as the solution degree
  int reference_level = 6;
  int reference_p = 3;

  std::vector<Scheme> schemes{Scheme::Frozen};
  double tol = 5e-7;
  int max_iter = 20;
  bool verify_linear_solves = false;

  std::string directory = "out";
  bool emit_svg = true;
  bool wall_time = true;
  double dof_target = 0.06;

  /// ProblemSpec for one sweep point; `f` is ignored unless the source is constant.
  ProblemSpec problem(double k, double epsilon, double f, Scheme scheme) const;
};

/// Parses config text, then applies `overrides` ("section.key=value").
/// Throws ConfigError naming the offending line or key.
RunConfig parse_config(std::istream& is, const std::vector<std::string>& overrides = {});
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(write_config(c)) reproduces c.
void write_config(std::ostream& os, const RunConfig& config);

}  // namespace nlh
