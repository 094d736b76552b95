#include "nlh/sparse.hpp"

#include <umfpack.h>

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace nlh {

int SparsityPattern::find(int i, int j) const {
  const auto first = col.begin() + row_ptr[i];
  const auto last = col.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? static_cast<int>(it - col.begin()) : -1;
}

PatternPtr make_pattern(int n, std::vector<std::vector<int>> rows) {
  auto p = std::make_shared<SparsityPattern>();
  p->n = n;
  p->row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    p->row_ptr[i + 1] = p->row_ptr[i] + static_cast<int>(r.size());
  }
  p->col.reserve(p->row_ptr[n]);
  for (int i = 0; i < n; ++i) p->col.insert(p->col.end(), rows[i].begin(), rows[i].end());
  return p;
}

SparseMatrixC::SparseMatrixC(PatternPtr pattern, CVector values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (!pattern_ || static_cast<int>(values_.size()) != pattern_->nnz()) {
    throw ArgumentError("SparseMatrixC: value count does not match the pattern");
  }
}

SparseMatrixC SparseMatrixC::from_triplets(int n, std::span<const int> rows, std::span<const int> cols,
                                           std::span<const cplx> values) {
  if (rows.size() != cols.size() || rows.size() != values.size()) {
    throw ArgumentError("from_triplets: triplet arrays differ in length");
  }
  std::vector<std::vector<int>> lists(n);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= n || cols[k] < 0 || cols[k] >= n) {
      throw ArgumentError("from_triplets: index out of range");
    }
    lists[rows[k]].push_back(cols[k]);
  }
  auto pattern = make_pattern(n, std::move(lists));
  CVector vals(pattern->nnz());
  for (std::size_t k = 0; k < rows.size(); ++k) vals[pattern->find(rows[k], cols[k])] += values[k];
  return SparseMatrixC(std::move(pattern), std::move(vals));
}

SparseMatrixC SparseMatrixC::identity(int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const CVector ones(n, cplx{1.0, 0.0});
  return from_triplets(n, idx, idx, ones);
}

cplx SparseMatrixC::at(int i, int j) const {
  const int k = pattern_->find(i, j);
  return k < 0 ? cplx{} : values_[k];
}

CVector matvec(const SparseMatrixC& m, std::span<const cplx> x) {
  if (static_cast<int>(x.size()) != m.n()) throw ArgumentError("matvec: dimension mismatch");
  const auto& p = m.pattern();
  CVector y(m.n());
  for (int i = 0; i < p.n; ++i) {
    cplx s{};
    for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) s += m.values()[k] * x[p.col[k]];
    y[i] = s;
  }
  return y;
}

double norm2(std::span<const cplx> x) {
  double s = 0.0;
  for (const cplx v : x) s += std::norm(v);
  return std::sqrt(s);
}

double relative_residual(const SparseMatrixC& m, std::span<const cplx> x, std::span<const cplx> b) {
  CVector r = matvec(m, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

namespace {

// UMFPACK reads the row-major arrays as compressed columns, i.e. it sees the
// transpose; systems are therefore solved with UMFPACK_Aat.
const double* packed(const CVector& v) { return reinterpret_cast<const double*>(v.data()); }

void default_control(double* control) {
  umfpack_zi_defaults(control);
  control[UMFPACK_PRL] = 0;
}

std::string umfpack_message(const char* what, int status) {
  return std::string(what) + " failed (UMFPACK status " + std::to_string(status) + ")";
}

}  // namespace

SymbolicAnalysis::SymbolicAnalysis(const SparseMatrixC& m) : pattern_(m.pattern_ptr()) {
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  default_control(control);
  const auto& p = m.pattern();
  const int status = umfpack_zi_symbolic(p.n, p.n, p.row_ptr.data(), p.col.data(), packed(m.values()),
                                         nullptr, &handle_, control, info);
  if (status == UMFPACK_ERROR_out_of_memory) throw ResourceError(umfpack_message("symbolic analysis", status));
  if (status != UMFPACK_OK) throw ArgumentError(umfpack_message("symbolic analysis", status));
}

SymbolicAnalysis::~SymbolicAnalysis() {
  if (handle_) umfpack_zi_free_symbolic(&handle_);
}

Factorization::Factorization(Factorization&& other) noexcept
    : matrix_(std::move(other.matrix_)), numeric_(other.numeric_), rcond_(other.rcond_) {
  other.numeric_ = nullptr;
}

Factorization& Factorization::operator=(Factorization&& other) noexcept {
  if (this != &other) {
    if (numeric_) umfpack_zi_free_numeric(&numeric_);
    matrix_ = std::move(other.matrix_);
    numeric_ = other.numeric_;
    rcond_ = other.rcond_;
    other.numeric_ = nullptr;
  }
  return *this;
}

Factorization::~Factorization() {
  if (numeric_) umfpack_zi_free_numeric(&numeric_);
}

Factorization factorize(const SparseMatrixC& m, const SymbolicAnalysis* symbolic) {
  if (m.n() == 0) throw ArgumentError("factorize: empty matrix");
  for (const cplx v : m.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DataError("factorize: non-finite entry");
  }
  std::unique_ptr<SymbolicAnalysis> own;
  if (!symbolic || symbolic->pattern() != m.pattern_ptr()) {
    own = std::make_unique<SymbolicAnalysis>(m);
    symbolic = own.get();
  }
  Factorization f;
  f.matrix_ = std::make_shared<const SparseMatrixC>(m);
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  default_control(control);
  const auto& p = f.matrix_->pattern();
  const int status = umfpack_zi_numeric(p.row_ptr.data(), p.col.data(), packed(f.matrix_->values()), nullptr,
                                        symbolic->handle(), &f.numeric_, control, info);
  if (status == UMFPACK_ERROR_out_of_memory) throw ResourceError(umfpack_message("factorization", status));
  f.rcond_ = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || !(f.rcond_ >= 1e-14)) {
    throw SingularMatrixError("factorize: numerically singular matrix (pivot ratio " +
                              std::to_string(f.rcond_) + ")");
  }
  if (status != UMFPACK_OK) throw ArgumentError(umfpack_message("factorization", status));
  return f;
}

CVector Factorization::solve(std::span<const cplx> rhs) const {
  if (static_cast<int>(rhs.size()) != n()) throw ArgumentError("solve: dimension mismatch");
  CVector x(rhs.size());
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  default_control(control);
  const auto& p = matrix_->pattern();
  const int status = umfpack_zi_solve(UMFPACK_Aat, p.row_ptr.data(), p.col.data(), packed(matrix_->values()),
                                      nullptr, reinterpret_cast<double*>(x.data()), nullptr,
                                      reinterpret_cast<const double*>(rhs.data()), nullptr, numeric_, control,
                                      info);
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
    throw ArgumentError(umfpack_message("solve", status));
  }
  return x;
}

void write_matrix_market(std::ostream& os, const SparseMatrixC& m) {
  os.precision(17);
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << m.n() << " " << m.n() << " " << m.nnz() << "\n";
  const auto& p = m.pattern();
  for (int i = 0; i < p.n; ++i) {
    for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
      os << i + 1 << " " << p.col[k] + 1 << " " << m.values()[k].real() << " " << m.values()[k].imag() << "\n";
    }
  }
}

SparseMatrixC read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket matrix coordinate complex general", 0) != 0) {
    throw DataError("read_matrix_market: unsupported header");
  }
  do {
    if (!std::getline(is, line)) throw DataError("read_matrix_market: missing size line");
  } while (!line.empty() && line[0] == '%');
  int rows = 0, cols = 0, nnz = 0;
  std::istringstream(line) >> rows >> cols >> nnz;
  if (rows != cols || rows <= 0) throw DataError("read_matrix_market: matrix must be square");
  std::vector<int> ri(nnz), ci(nnz);
  CVector v(nnz);
  for (int k = 0; k < nnz; ++k) {
    double re = 0.0, im = 0.0;
    if (!(is >> ri[k] >> ci[k] >> re >> im)) throw DataError("read_matrix_market: truncated entries");
    --ri[k];
    --ci[k];
    v[k] = {re, im};
  }
  return SparseMatrixC::from_triplets(rows, ri, ci, v);
}

void write_vector_market(std::ostream& os, std::span<const cplx> v) {
  os.precision(17);
  os << "%%MatrixMarket matrix array complex general\n";
  os << v.size() << " 1\n";
  for (const cplx c : v) os << c.real() << " " << c.imag() << "\n";
}

}  // namespace nlh
