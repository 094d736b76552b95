#pragma once

#include <optional>
#include <string>
#include <variant>

#include "nlh/common.hpp"
#include "nlh/mesh.hpp"

namespace nlh {

/// f(x) = value everywhere.
struct ConstantSource {
  cplx value{0.0, 0.0};
};

/// f(x) = amplitude * exp(-1 / (1.2 - (|x - center| / radius)^2)) for
/// |x - center| < radius, 0 elsewhere.
struct BumpSource {
  double amplitude = 10000.0;
  Point center{-0.55, 0.0};
  double radius = 0.05;
};

/// Source that makes u = exp(i k d.x) an exact solution for any epsilon:
/// f = -k^2 epsilon chi_D u (zero when epsilon == 0).
struct PlaneWaveSource {
  Point direction{1.0, 0.0};
};

using SourceSpec = std::variant<ConstantSource, BumpSource, PlaneWaveSource>;

struct ZeroBoundary {};

/// g = d_nu u + i k u for u = exp(i k d.x), with the exact normal x / |x|.
struct PlaneWaveImpedance {
  Point direction{1.0, 0.0};
};

using BoundarySpec = std::variant<ZeroBoundary, PlaneWaveImpedance>;

enum class Scheme { Frozen, NewtonLike };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct ProblemSpec {
  double k = 1.0;
  double epsilon = 0.0;
  SourceSpec source = ConstantSource{};
  BoundarySpec boundary = ZeroBoundary{};
  Scheme scheme = Scheme::Frozen;
  double tol = 5e-7;
  int max_iter = 20;

  /// Throws ArgumentError unless k >= 1, epsilon >= 0, tol > 0, max_iter >= 1.
  void validate() const;
};

cplx source_value(const ProblemSpec& spec, Point x, Region region);

/// Disk containing the support of a compactly supported source, if any.
struct SupportDisk {
  Point center;
  double radius;
};
std::optional<SupportDisk> source_support(const ProblemSpec& spec);
cplx boundary_value(const ProblemSpec& spec, Point x);

/// Plane wave exp(i k d.x) and its gradient.
struct PlaneWave {
  double k;
  Point direction;

  cplx value(Point x) const;
  std::array<cplx, 2> gradient(Point x) const;
};

}  // namespace nlh
