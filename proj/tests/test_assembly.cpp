#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nlh/assembly.hpp"
#include "nlh/quadrature.hpp"

using namespace nlh;

namespace {

Eigen::MatrixXd dense(const HelmholtzOperators& ops, const std::vector<double>& values) {
  const SparsityPattern& pat = *ops.pattern();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(pat.n, pat.n);
  for (int i = 0; i < pat.n; ++i)
    for (int q = pat.row_ptr[i]; q < pat.row_ptr[i + 1]; ++q) m(i, pat.col[q]) = values[q];
  return m;
}

double max_abs(const CVector& v) {
  double m = 0.0;
  for (const cplx z : v) m = std::max(m, std::abs(z));
  return m;
}

ProblemSpec kerr_spec(Scheme s, double eps = 0.1) {
  ProblemSpec spec;
  spec.k = 8.0;
  spec.epsilon = eps;
  spec.source = ConstantSource{50.0};
  spec.scheme = s;
  return spec;
}

FeField smooth_field(const SpacePtr& s) {
  return interpolate(s, [](Point x) { return cplx{1.0 + x.x * x.y, std::cos(2.0 * x.y)}; });
}

}  // namespace

TEST(ElementMatrices, LinearReferenceTriangle) {
  const MeshPtr m = std::make_shared<const Mesh>(std::vector<Point>{{0, 0}, {1, 0}, {0, 1}},
                                                 std::vector<Mesh::Triangle>{{0, 1, 2}},
                                                 std::vector<Region>{Region::OutD}, 1);
  const HelmholtzOperators ops(make_space(m, 1));
  const Eigen::MatrixXd s = dense(ops, ops.stiffness());
  const Eigen::MatrixXd mass = dense(ops, ops.mass());
  Eigen::Matrix3d s_ref, m_ref;
  s_ref << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
  m_ref << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  m_ref *= 0.5 / 12.0;
  EXPECT_LT((s - s_ref).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((mass - m_ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Operators, RealMatricesAreSymmetric) {
  const HelmholtzOperators ops(make_space(disk_mesh_level(3, 3), 3));
  for (const auto* v : {&ops.stiffness(), &ops.mass(), &ops.boundary_mass()}) {
    const Eigen::MatrixXd d = dense(ops, *v);
    EXPECT_LT((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-14 * d.cwiseAbs().maxCoeff());
  }
}

TEST(Operators, StiffnessPlusMassIsPositiveDefinite) {
  const HelmholtzOperators ops(make_space(disk_mesh_level(3, 2), 2));
  const Eigen::MatrixXd a = dense(ops, ops.stiffness()) + dense(ops, ops.mass());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Operators, BoundaryMassIsSemidefiniteWithBoundaryRank) {
  const HelmholtzOperators ops(make_space(disk_mesh_level(3, 2), 2));
  const Eigen::MatrixXd b = dense(ops, ops.boundary_mass());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
  const double top = es.eigenvalues().maxCoeff();
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-13 * top);
  const int rank = static_cast<int>((es.eigenvalues().array() > 1e-10 * top).count());
  EXPECT_EQ(rank, static_cast<int>(ops.space().boundary_dofs().size()));
}

TEST(Operators, BoundaryMassSumsToPerimeter) {
  const HelmholtzOperators ops(make_space(disk_mesh_level(4, 3), 3));
  double s = 0.0;
  for (double v : ops.boundary_mass()) s += v;
  // The cubic boundary map is not exactly the circle; its length error is O(h^8) ~ 3e-7.
  EXPECT_NEAR(s, 2.0 * kPi, 1e-6);
}

TEST(Operators, KerrMassOfUnitFieldIsAreaOfD) {
  const SpacePtr space = make_space(disk_mesh_level(4, 2), 2);
  const HelmholtzOperators ops(space);
  const FeField one = interpolate(space, [](Point) { return cplx{1.0, 0.0}; });
  double s = 0.0;
  for (double v : ops.kerr_mass(one)) s += v;
  EXPECT_NEAR(s, kPi * kInterfaceRadius * kInterfaceRadius, 1e-5);
  cplx l{};
  for (const cplx z : ops.kerr_load(one)) l += z;
  EXPECT_NEAR(l.real(), kPi / 4.0, 1e-5);
}

TEST(Operators, ApplyMatchesDense) {
  const HelmholtzOperators ops(make_space(disk_mesh_level(3, 2), 2));
  const int n = ops.space().n_dofs();
  CVector x(n);
  for (int i = 0; i < n; ++i) x[i] = {std::sin(0.3 * i), std::cos(0.7 * i)};
  const CVector y = ops.apply(ops.stiffness(), x);
  const Eigen::MatrixXd s = dense(ops, ops.stiffness());
  Eigen::VectorXcd xe(n);
  for (int i = 0; i < n; ++i) xe[i] = x[i];
  const Eigen::VectorXcd ye = s.cast<cplx>() * xe;
  for (int i = 0; i < n; ++i) EXPECT_LT(std::abs(y[i] - ye[i]), 1e-12 * (1.0 + std::abs(ye[i])));
}

TEST(Assembly, ComplexSymmetric) {
  const SpacePtr space = make_space(disk_mesh_level(3, 3), 3);
  const HelmholtzOperators ops(space);
  for (Scheme s : {Scheme::Frozen, Scheme::NewtonLike}) {
    const AssembledSystem sys = assemble_linearized(ops, kerr_spec(s), smooth_field(space));
    const auto& pat = sys.matrix.pattern();
    double defect = 0.0, scale = 0.0;
    for (int i = 0; i < pat.n; ++i)
      for (int q = pat.row_ptr[i]; q < pat.row_ptr[i + 1]; ++q) {
        defect = std::max(defect, std::abs(sys.matrix.values()[q] - sys.matrix.at(pat.col[q], i)));
        scale = std::max(scale, std::abs(sys.matrix.values()[q]));
      }
    EXPECT_LE(defect, 1e-12 * scale);
  }
}

TEST(Assembly, MatrixFollowsWeakForm) {
  const SpacePtr space = make_space(disk_mesh_level(3, 2), 2);
  const HelmholtzOperators ops(space);
  const FeField phi = smooth_field(space);
  const std::vector<double> kerr = ops.kerr_mass(phi);
  const double k = 8.0, eps = 0.1;
  for (Scheme s : {Scheme::Frozen, Scheme::NewtonLike}) {
    const double w = s == Scheme::Frozen ? 1.0 : 2.0;
    const AssembledSystem sys = assemble_linearized(ops, kerr_spec(s, eps), phi);
    for (std::size_t q = 0; q < kerr.size(); ++q) {
      const cplx expect = ops.stiffness()[q] - k * k * (ops.mass()[q] + w * eps * kerr[q]) +
                          cplx{0.0, k} * ops.boundary_mass()[q];
      ASSERT_LT(std::abs(sys.matrix.values()[q] - expect), 1e-12 * (1.0 + std::abs(expect)));
    }
  }
  const CVector data = ops.data_load(kerr_spec(Scheme::NewtonLike, eps));
  const CVector cubic = ops.kerr_load(phi);
  const AssembledSystem newton = assemble_linearized(ops, kerr_spec(Scheme::NewtonLike, eps), phi);
  for (std::size_t i = 0; i < data.size(); ++i)
    EXPECT_LT(std::abs(newton.load[i] - (data[i] - k * k * eps * cubic[i])), 1e-11);
}

TEST(Assembly, SchemesCoincideForZeroEpsilonOrZeroField) {
  const SpacePtr space = make_space(disk_mesh_level(3, 2), 2);
  const HelmholtzOperators ops(space);
  const auto compare = [&](const ProblemSpec& a, const ProblemSpec& b, const FeField& phi) {
    const AssembledSystem x = assemble_linearized(ops, a, phi), y = assemble_linearized(ops, b, phi);
    for (std::size_t q = 0; q < x.matrix.values().size(); ++q) EXPECT_EQ(x.matrix.values()[q], y.matrix.values()[q]);
    for (std::size_t i = 0; i < x.load.size(); ++i) EXPECT_EQ(x.load[i], y.load[i]);
  };
  compare(kerr_spec(Scheme::Frozen, 0.0), kerr_spec(Scheme::NewtonLike, 0.0), smooth_field(space));
  compare(kerr_spec(Scheme::Frozen), kerr_spec(Scheme::NewtonLike), FeField(space));
}

TEST(Assembly, NewtonLikeEqualsFrozenAtScaledField) {
  const SpacePtr space = make_space(disk_mesh_level(3, 3), 3);
  const HelmholtzOperators ops(space);
  const FeField phi = smooth_field(space);
  CVector scaled = phi.coefficients();
  for (auto& z : scaled) z *= std::sqrt(2.0);
  const AssembledSystem a = assemble_linearized(ops, kerr_spec(Scheme::NewtonLike), phi);
  const AssembledSystem b = assemble_linearized(ops, kerr_spec(Scheme::Frozen), FeField(space, scaled));
  double diff = 0.0;
  for (std::size_t q = 0; q < a.matrix.values().size(); ++q)
    diff = std::max(diff, std::abs(a.matrix.values()[q] - b.matrix.values()[q]));
  EXPECT_LE(diff, 1e-12 * max_abs(a.matrix.values()));
}

TEST(Loads, ConstantSourceSumsToArea) {
  const SpacePtr space = make_space(disk_mesh_level(4, 3), 3);
  ProblemSpec spec;
  spec.source = ConstantSource{1.0};
  cplx s{};
  for (const cplx z : HelmholtzOperators(space).source_load(spec)) s += z;
  EXPECT_NEAR(s.real(), space->mesh().area(), 1e-12);
  EXPECT_NEAR(s.real(), kPi, 1e-6);
  EXPECT_EQ(s.imag(), 0.0);
}

TEST(Loads, BumpSourceMatchesFineQuadrature) {
  // The bump is narrow; its load must not depend on how coarse the mesh is.
  ProblemSpec spec;
  spec.source = BumpSource{};
  double total_coarse = 0.0, total_fine = 0.0;
  for (const cplx z : HelmholtzOperators(make_space(disk_mesh_level(3, 2), 2)).source_load(spec)) total_coarse += z.real();
  for (const cplx z : HelmholtzOperators(make_space(disk_mesh_level(7, 2), 2)).source_load(spec)) total_fine += z.real();
  EXPECT_NEAR(total_coarse / total_fine, 1.0, 1e-4);
}

TEST(Loads, ZeroBoundaryDataGivesZeroVector) {
  const SpacePtr space = make_space(disk_mesh_level(3, 2), 2);
  ProblemSpec spec;
  for (const cplx z : boundary_load(space, spec)) EXPECT_EQ(z, cplx{});
}

TEST(Loads, PlaneWaveImpedanceMatchesBruteForceQuadrature) {
  const SpacePtr space = make_space(disk_mesh_level(3, 3), 3);
  ProblemSpec spec;
  spec.k = 8.0;
  spec.boundary = PlaneWaveImpedance{{1.0, 0.0}};
  const CVector g = boundary_load(space, spec);

  const Mesh& m = space->mesh();
  CVector ref(space->n_dofs());
  const QuadratureRule rule = gauss_legendre(30);
  std::vector<double> phi;
  for (int e : m.boundary_edges()) {
    const int t = m.edges()[e].triangles[0], le = m.edges()[e].local[0];
    const auto dofs = space->dofs(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point xi = reference_edge_point(le, rule.points[q].x);
      const Point x = m.map(t, xi);
      const double ds = norm(m.jacobian(t, xi).apply(reference_edge_tangent(le)));
      const Point nu = (1.0 / norm(x)) * x;
      const cplx u = std::exp(cplx{0.0, 8.0 * x.x});
      const cplx gx = cplx{0.0, 8.0} * (nu.x + 1.0) * u;
      space->element().values(xi, phi);
      for (int i = 0; i < space->dofs_per_element(); ++i) ref[dofs[i]] += rule.weights[q] * ds * gx * phi[i];
    }
  }
  for (int i = 0; i < space->n_dofs(); ++i) EXPECT_LT(std::abs(g[i] - ref[i]), 1e-8);
}

TEST(Residual, ZeroFieldGivesLoad) {
  const SpacePtr space = make_space(disk_mesh_level(3, 2), 2);
  const HelmholtzOperators ops(space);
  const ProblemSpec spec = kerr_spec(Scheme::Frozen);
  const CVector r = assemble_nonlinear_residual(ops, spec, FeField(space));
  const CVector load = ops.data_load(spec);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], load[i]);
}

TEST(Residual, LinearSolveHasTinyResidual) {
  const SpacePtr space = make_space(disk_mesh_level(4, 2), 2);
  const HelmholtzOperators ops(space);
  ProblemSpec spec = kerr_spec(Scheme::Frozen, 0.0);
  spec.boundary = PlaneWaveImpedance{};
  const AssembledSystem sys = assemble_linearized(ops, spec, FeField(space));
  const FeField u(space, factorize(sys.matrix).solve(sys.load));
  EXPECT_LE(norm2(assemble_nonlinear_residual(ops, spec, u)) / norm2(sys.load), 1e-10);
}

TEST(Residual, IncludesTheCubicTerm) {
  const SpacePtr space = make_space(disk_mesh_level(3, 2), 2);
  const HelmholtzOperators ops(space);
  const ProblemSpec spec = kerr_spec(Scheme::Frozen);
  const FeField u = smooth_field(space);
  // r(u) = F + G - B_frozen(u; u) u, since the frozen matrix around u is the nonlinear operator at u.
  const AssembledSystem sys = assemble_linearized(ops, spec, u);
  const CVector au = matvec(sys.matrix, u.coefficients());
  const CVector r = assemble_nonlinear_residual(ops, spec, u);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LT(std::abs(r[i] - (sys.load[i] - au[i])), 1e-10);
}
