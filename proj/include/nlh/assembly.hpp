#pragma once

#include <span>
#include <vector>

#include "nlh/fe_space.hpp"
#include "nlh/problem.hpp"
#include "nlh/sparse.hpp"

namespace nlh {

/// The Φ-independent pieces of the linearized Helmholtz operator on one
/// space, assembled once: stiffness S, mass M, boundary mass B_Γ (all real
/// symmetric, sharing one pattern), plus per-element scatter maps used to
/// assemble the Kerr terms on IN_D elements.
///
/// Sign/conjugation convention: basis functions are real and test functions
/// enter unconjugated, so every assembled matrix is complex symmetric and the
/// algebraic system reads (S - k^2 W + i k B_Γ) u = F + G.
class HelmholtzOperators {
 public:
  explicit HelmholtzOperators(SpacePtr space);

  const FeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const PatternPtr& pattern() const { return pattern_; }

  const std::vector<double>& stiffness() const { return stiffness_; }
  const std::vector<double>& mass() const { return mass_; }
  const std::vector<double>& boundary_mass() const { return boundary_mass_; }

  /// Values of (|Φ|^2 φ_j, φ_i)_D on the shared pattern.
  std::vector<double> kerr_mass(const FeField& phi) const;
  /// (|u|^2 u, φ_i)_D.
  CVector kerr_load(const FeField& u) const;
  /// (f, φ_i).
  CVector source_load(const ProblemSpec& spec) const;
  /// (g, φ_i)_Γ.
  CVector boundary_load(const ProblemSpec& spec) const;
  /// (f, φ_i) + (g, φ_i)_Γ.
  CVector data_load(const ProblemSpec& spec) const;

  /// y = A x for a real matrix A given by its values on the pattern.
  CVector apply(std::span<const double> values, std::span<const cplx> x) const;

  /// sqrt(x^H S x + k^2 x^H M x).
  double energy_norm(std::span<const cplx> x, double k) const;

  /// Scatter positions of the local (i, j) entries of triangle t.
  std::span<const int> positions(int t) const {
    const std::size_t n = static_cast<std::size_t>(space_->dofs_per_element());
    return {positions_.data() + static_cast<std::size_t>(t) * n * n, n * n};
  }
  /// detJ * weight at the volume quadrature points of triangle t.
  std::span<const double> weights(int t) const {
    const std::size_t nq = space_->volume_table().rule.size();
    return {jxw_.data() + static_cast<std::size_t>(t) * nq, nq};
  }

 private:
  SpacePtr space_;
  PatternPtr pattern_;
  std::vector<double> stiffness_;
  std::vector<double> mass_;
  std::vector<double> boundary_mass_;
  std::vector<int> positions_;
  std::vector<double> jxw_;
  std::vector<int> in_d_;
};

/// Linear system of one fixed-point step, linearized around `phi`.
struct AssembledSystem {
  SparseMatrixC matrix;
  CVector load;
  Scheme scheme = Scheme::Frozen;
  FeField phi;
};

/// FROZEN: S - k^2 M(1 + ε χ_D |Φ|^2) + i k B_Γ, load (f, v) + (g, v)_Γ.
/// NEWTONLIKE: weight 1 + 2 ε χ_D |Φ|^2 and load reduced by k^2 ε (|Φ|^2 Φ, v)_D.
AssembledSystem assemble_linearized(const HelmholtzOperators& ops, const ProblemSpec& spec,
                                    const FeField& phi);
/// Same, reusing a precomputed data_load(spec).
AssembledSystem assemble_linearized(const HelmholtzOperators& ops, const ProblemSpec& spec,
                                    const FeField& phi, std::span<const cplx> data_load);
AssembledSystem assemble_linearized(const SpacePtr& space, const ProblemSpec& spec, const FeField& phi);

/// Algebraic residual of the nonlinear Galerkin equations at u:
/// (f, φ_i) + (g, φ_i)_Γ - B(u, φ_i).
CVector assemble_nonlinear_residual(const HelmholtzOperators& ops, const ProblemSpec& spec,
                                    const FeField& u);
CVector assemble_nonlinear_residual(const HelmholtzOperators& ops, const ProblemSpec& spec,
                                    const FeField& u, std::span<const cplx> data_load);
CVector assemble_nonlinear_residual(const SpacePtr& space, const ProblemSpec& spec, const FeField& u);

/// (g, φ_i)_Γ on the curved boundary edges.
CVector boundary_load(const SpacePtr& space, const ProblemSpec& spec);

}  // namespace nlh
