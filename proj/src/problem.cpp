#include "nlh/problem.hpp"

namespace nlh {

std::string to_string(Scheme s) { return s == Scheme::Frozen ? "frozen" : "newtonlike"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "frozen") return Scheme::Frozen;
  if (s == "newtonlike") return Scheme::NewtonLike;
  throw ArgumentError("unknown scheme '" + s + "' (expected frozen | newtonlike)");
}

void ProblemSpec::validate() const {
  if (!(k >= 1.0)) throw ArgumentError("ProblemSpec: k must be >= 1");
  if (!(epsilon >= 0.0)) throw ArgumentError("ProblemSpec: epsilon must be >= 0");
  if (!(tol > 0.0)) throw ArgumentError("ProblemSpec: tol must be > 0");
  if (max_iter < 1) throw ArgumentError("ProblemSpec: max_iter must be >= 1");
  if (const auto* b = std::get_if<BumpSource>(&source); b && !(b->radius > 0.0)) {
    throw ArgumentError("ProblemSpec: bump radius must be > 0");
  }
}

cplx PlaneWave::value(Point x) const {
  const double phase = k * dot(direction, x);
  return {std::cos(phase), std::sin(phase)};
}

std::array<cplx, 2> PlaneWave::gradient(Point x) const {
  const cplx iku = cplx{0.0, k} * value(x);
  return {iku * direction.x, iku * direction.y};
}

cplx source_value(const ProblemSpec& spec, Point x, Region region) {
  return std::visit(
      [&](const auto& s) -> cplx {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantSource>) {
          return s.value;
        } else if constexpr (std::is_same_v<S, BumpSource>) {
          const double r = norm(x - s.center) / s.radius;
          if (r >= 1.0) return 0.0;
          return s.amplitude * std::exp(-1.0 / (1.2 - r * r));
        } else {
          if (region != Region::InD || spec.epsilon == 0.0) return 0.0;
          return -spec.k * spec.k * spec.epsilon * PlaneWave{spec.k, s.direction}.value(x);
        }
      },
      spec.source);
}

std::optional<SupportDisk> source_support(const ProblemSpec& spec) {
  if (const auto* b = std::get_if<BumpSource>(&spec.source)) return SupportDisk{b->center, b->radius};
  return std::nullopt;
}

cplx boundary_value(const ProblemSpec& spec, Point x) {
  return std::visit(
      [&](const auto& g) -> cplx {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, ZeroBoundary>) {
          return 0.0;
        } else {
          const PlaneWave w{spec.k, g.direction};
          const auto grad = w.gradient(x);
          const double r = norm(x);
          const Point nu{x.x / r, x.y / r};
          return grad[0] * nu.x + grad[1] * nu.y + cplx{0.0, spec.k} * w.value(x);
        }
      },
      spec.boundary);
}

}  // namespace nlh
