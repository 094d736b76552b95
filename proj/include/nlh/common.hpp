#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlh {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

/// 2x2 matrix stored row-major: [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  double det() const { return a * d - b * c; }
  Point apply(Point v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 inverse() const {
    const double s = 1.0 / det();
    return {s * d, -s * b, -s * c, s * a};
  }
  /// Applies the inverse transpose, which maps reference gradients to physical ones.
  Point apply_inverse_transpose(Point g) const {
    const double s = 1.0 / det();
    return {s * (d * g.x - c * g.y), s * (-b * g.x + a * g.y)};
  }
};

// Error categories shared by every module.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace nlh
