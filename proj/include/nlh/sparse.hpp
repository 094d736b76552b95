#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "nlh/common.hpp"

namespace nlh {

/// Compressed-row pattern with sorted column indices.
struct SparsityPattern {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;

  int nnz() const { return static_cast<int>(col.size()); }
  /// Position of (i, j) in the value array, or -1 if outside the pattern.
  int find(int i, int j) const;
};

using PatternPtr = std::shared_ptr<const SparsityPattern>;

/// Builds a pattern from per-row column lists (duplicates allowed).
PatternPtr make_pattern(int n, std::vector<std::vector<int>> rows);

/// Square complex sparse matrix in compressed-row layout.
class SparseMatrixC {
 public:
  SparseMatrixC() = default;
  SparseMatrixC(PatternPtr pattern, CVector values);

  /// Sums duplicate (row, col) entries.
  static SparseMatrixC from_triplets(int n, std::span<const int> rows, std::span<const int> cols,
                                     std::span<const cplx> values);
  static SparseMatrixC identity(int n);

  int n() const { return pattern_ ? pattern_->n : 0; }
  int nnz() const { return pattern_ ? pattern_->nnz() : 0; }
  const SparsityPattern& pattern() const { return *pattern_; }
  const PatternPtr& pattern_ptr() const { return pattern_; }
  const CVector& values() const { return values_; }
  CVector& values() { return values_; }

  cplx at(int i, int j) const;

 private:
  PatternPtr pattern_;
  CVector values_;
};

CVector matvec(const SparseMatrixC& m, std::span<const cplx> x);

double norm2(std::span<const cplx> x);

/// ||M x - b||_2 / ||b||_2 (or the absolute residual if b == 0).
double relative_residual(const SparseMatrixC& m, std::span<const cplx> x, std::span<const cplx> b);

/// Fill-reducing symbolic analysis of a pattern; reusable across
/// factorizations of matrices sharing that pattern.
class SymbolicAnalysis {
 public:
  explicit SymbolicAnalysis(const SparseMatrixC& m);
  ~SymbolicAnalysis();
  SymbolicAnalysis(const SymbolicAnalysis&) = delete;
  SymbolicAnalysis& operator=(const SymbolicAnalysis&) = delete;

  const PatternPtr& pattern() const { return pattern_; }
  void* handle() const { return handle_; }

 private:
  PatternPtr pattern_;
  void* handle_ = nullptr;
};

/// Sparse LU factors with partial pivoting. Immutable; concurrent solves
/// with distinct right-hand sides are safe.
class Factorization {
 public:
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;
  Factorization(Factorization&& other) noexcept;
  Factorization& operator=(Factorization&& other) noexcept;
  ~Factorization();

  int n() const { return matrix_->n(); }
  /// Reciprocal pivot-ratio estimate min|U_ii| / max|U_ii|.
  double rcond() const { return rcond_; }

  /// Throws ArgumentError on a dimension mismatch.
  CVector solve(std::span<const cplx> rhs) const;

 private:
  friend Factorization factorize(const SparseMatrixC&, const SymbolicAnalysis*);
  Factorization() = default;

  std::shared_ptr<const SparseMatrixC> matrix_;
  void* numeric_ = nullptr;
  double rcond_ = 0.0;
};

/// Throws SingularMatrixError when the smallest pivot falls below
/// 1e-14 relative to the largest.
Factorization factorize(const SparseMatrixC& m, const SymbolicAnalysis* symbolic = nullptr);

/// Matrix Market coordinate export (`complex general`, 1-based triplets).
void write_matrix_market(std::ostream& os, const SparseMatrixC& m);
SparseMatrixC read_matrix_market(std::istream& is);
/// Matrix Market array export of a complex vector.
void write_vector_market(std::ostream& os, std::span<const cplx> v);

}  // namespace nlh
