#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nlh/fe_space.hpp"

namespace nlh {

/// ||u||_{1,k} = sqrt(|u|_1^2 + k^2 ||u||_0^2), via the assembled stiffness
/// and mass matrices.
double energy_norm(const FeField& field, double k);

/// Same norm by direct elementwise quadrature of |∇u|^2 + k^2 |u|^2.
double energy_norm_quadrature(const FeField& field, double k, int extra_order = 0);

struct FieldError {
  double energy_abs = 0.0;
  double energy_rel = 0.0;
  double l2_abs = 0.0;
  double l2_rel = 0.0;
};

/// Errors of `coarse` against `reference`, integrated on the reference mesh.
/// The coarse field is evaluated at the reference quadrature points through
/// red-refinement parent links when the reference mesh descends from a mesh
/// with the coarse topology, and by point location otherwise. Relative
/// errors divide by the reference norms. Throws ArgumentError if a point
/// cannot be located.
FieldError error_vs_reference(const FeField& coarse, const FeField& reference, double k);

/// Value and gradient of an analytic function.
struct ExactSolution {
  std::function<cplx(Point)> value;
  std::function<std::array<cplx, 2>(Point)> gradient;
};

/// Errors against an analytic function, by quadrature on the field's mesh.
FieldError error_vs_exact(const FeField& field, const ExactSolution& exact, double k, int extra_order = 2);

/// max |u| over volume quadrature points and Lagrange nodes of IN_D
/// elements; a lower bound for the true supremum.
double linf_on_D(const FeField& field, int extra_order = 0);

struct ErrorRow {
  int level = 0;
  double h = 0.0;
  int ndofs = 0;
  double rel_energy_err = 0.0;
  double rel_l2_err = 0.0;
  double abs_energy_err = 0.0;
  double abs_l2_err = 0.0;
  double linf_D = 0.0;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
};

/// slope_j = log(e_j / e_{j+1}) / log(h_j / h_{j+1}) for the energy error;
/// nullopt where an error is zero. Throws ArgumentError for < 2 rows.
std::vector<std::optional<double>> fit_rates(const ErrorReport& report);

/// Columns: level, h, ndofs, rel_energy_err, rel_l2_err, slope. The slope on
/// row j is the rate from row j-1 to row j (empty on the first row).
void write_error_report_csv(std::ostream& os, const ErrorReport& report);

}  // namespace nlh
