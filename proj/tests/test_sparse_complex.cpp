#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>
#include <sstream>

#include "nlh/sparse.hpp"

using namespace nlh;

namespace {

// Random sparse complex-symmetric matrix with a dominant diagonal.
SparseMatrixC random_symmetric(int n, double density, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<int> rows, cols;
  CVector vals;
  for (int i = 0; i < n; ++i) {
    rows.push_back(i);
    cols.push_back(i);
    vals.push_back({4.0 + u(gen), u(gen)});
    for (int j = i + 1; j < n; ++j) {
      if (!keep(gen)) continue;
      const cplx v{u(gen), u(gen)};
      rows.insert(rows.end(), {i, j});
      cols.insert(cols.end(), {j, i});
      vals.insert(vals.end(), {v, v});
    }
  }
  return SparseMatrixC::from_triplets(n, rows, cols, vals);
}

CVector random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVector v(n);
  for (auto& z : v) z = {u(gen), u(gen)};
  return v;
}

cplx bilinear(const CVector& x, const CVector& y) {
  cplx s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

TEST(Pattern, FindAndDuplicates) {
  const PatternPtr p = make_pattern(3, {{2, 0, 2}, {1}, {0, 2}});
  EXPECT_EQ(p->nnz(), 5);
  EXPECT_EQ(p->find(0, 2), 1);
  EXPECT_EQ(p->find(1, 0), -1);
  EXPECT_EQ(p->find(2, 2), 4);
}

TEST(SparseMatrix, TripletsSumDuplicates) {
  const std::vector<int> r{0, 0, 1}, c{1, 1, 0};
  const CVector v{{1, 0}, {2, 1}, {5, 0}};
  const SparseMatrixC m = SparseMatrixC::from_triplets(2, r, c, v);
  EXPECT_EQ(m.at(0, 1), cplx(3, 1));
  EXPECT_EQ(m.at(1, 0), cplx(5, 0));
  EXPECT_EQ(m.at(1, 1), cplx(0, 0));
}

TEST(Factorize, IdentityReturnsRhs) {
  const CVector b = random_vector(7, 1);
  const CVector x = factorize(SparseMatrixC::identity(7)).solve(b);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(x[i], b[i]);
}

TEST(Factorize, TwoByTwoHandInverse) {
  const std::vector<int> r{0, 0, 1, 1}, c{0, 1, 0, 1};
  const CVector v{{2, 0}, {0, 1}, {0, 1}, {1, 0}};
  const SparseMatrixC m = SparseMatrixC::from_triplets(2, r, c, v);
  const CVector x = factorize(m).solve(CVector{{1, 0}, {0, 0}});
  EXPECT_LT(std::abs(x[0] - cplx(1.0 / 3.0, 0.0)), 1e-15);
  EXPECT_LT(std::abs(x[1] - cplx(0.0, -1.0 / 3.0)), 1e-15);
}

TEST(Factorize, RandomSymmetricResidual) {
  const SparseMatrixC m = random_symmetric(50, 0.1, 42);
  const CVector b = random_vector(50, 7);
  const CVector x = factorize(m).solve(b);
  EXPECT_LE(relative_residual(m, x, b), 1e-10);
}

TEST(Factorize, ZeroRhsGivesZero) {
  const CVector x = factorize(random_symmetric(20, 0.2, 3)).solve(CVector(20));
  for (const cplx z : x) EXPECT_EQ(z, cplx{});
}

TEST(Factorize, SymbolicAnalysisIsReusable) {
  SparseMatrixC m = random_symmetric(40, 0.15, 5);
  const SymbolicAnalysis sym(m);
  const CVector b = random_vector(40, 9);
  for (int round = 0; round < 3; ++round) {
    for (auto& v : m.values()) v *= cplx(1.1, 0.05);
    EXPECT_LE(relative_residual(m, factorize(m, &sym).solve(b), b), 1e-10);
  }
}

TEST(Factorize, SingularThrows) {
  const std::vector<int> r{0, 0, 1, 1}, c{0, 1, 0, 1};
  const CVector v{{1, 0}, {2, 0}, {2, 0}, {4, 0}};
  EXPECT_THROW(factorize(SparseMatrixC::from_triplets(2, r, c, v)), SingularMatrixError);
}

TEST(Factorize, DimensionMismatchThrows) {
  const Factorization f = factorize(SparseMatrixC::identity(3));
  EXPECT_THROW(f.solve(CVector(4)), ArgumentError);
}

TEST(Matvec, Identity) {
  const CVector x = random_vector(9, 2);
  EXPECT_EQ(matvec(SparseMatrixC::identity(9), x), x);
}

TEST(Matvec, MatchesDense) {
  const int n = 20;
  const SparseMatrixC m = random_symmetric(n, 0.3, 11);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = m.at(i, j);
  const CVector x = random_vector(n, 12);
  Eigen::VectorXcd xe(n);
  for (int i = 0; i < n; ++i) xe[i] = x[i];
  const Eigen::VectorXcd ye = d * xe;
  const CVector y = matvec(m, x);
  for (int i = 0; i < n; ++i) EXPECT_LT(std::abs(y[i] - ye[i]), 1e-13);
}

TEST(Matvec, TransposeSymmetry) {
  const SparseMatrixC m = random_symmetric(30, 0.2, 21);
  const CVector x = random_vector(30, 22), y = random_vector(30, 23);
  const cplx a = bilinear(x, matvec(m, y)), b = bilinear(y, matvec(m, x));
  EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
}

TEST(Matvec, DimensionMismatchThrows) {
  EXPECT_THROW(matvec(SparseMatrixC::identity(3), CVector(2)), ArgumentError);
}

TEST(MatrixMarket, RoundTrip) {
  const SparseMatrixC m = random_symmetric(15, 0.3, 31);
  std::stringstream ss;
  write_matrix_market(ss, m);
  EXPECT_EQ(ss.str().rfind("%%MatrixMarket matrix coordinate complex general", 0), 0u);
  const SparseMatrixC back = read_matrix_market(ss);
  ASSERT_EQ(back.n(), m.n());
  ASSERT_EQ(back.nnz(), m.nnz());
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) EXPECT_EQ(back.at(i, j), m.at(i, j));
}
