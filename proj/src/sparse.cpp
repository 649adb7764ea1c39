#include "g2duct/sparse.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "g2duct/errors.hpp"

namespace g2duct {

SparseMatrix SparseMatrix::from_pattern(int rows, int cols,
                                        std::vector<std::vector<int>>& row_cols) {
  SparseMatrix A(rows, cols);
  A.row_ptr_.assign(rows + 1, 0);
  for (int i = 0; i < rows; ++i) {
    auto& rc = row_cols[i];
    std::sort(rc.begin(), rc.end());
    rc.erase(std::unique(rc.begin(), rc.end()), rc.end());
    A.row_ptr_[i + 1] = A.row_ptr_[i] + static_cast<int>(rc.size());
  }
  A.col_idx_.reserve(A.row_ptr_[rows]);
  for (int i = 0; i < rows; ++i)
    A.col_idx_.insert(A.col_idx_.end(), row_cols[i].begin(), row_cols[i].end());
  A.values_.assign(A.col_idx_.size(), 0.0);
  return A;
}

void SparseMatrix::add(int i, int j, double v) {
  auto beg = col_idx_.begin() + row_ptr_[i];
  auto end = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(beg, end, j);
  if (it == end || *it != j)
    throw std::logic_error("SparseMatrix::add: entry outside the pattern");
  values_[it - col_idx_.begin()] += v;
}

double SparseMatrix::coeff(int i, int j) const {
  auto beg = col_idx_.begin() + row_ptr_[i];
  auto end = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(beg, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[it - col_idx_.begin()];
}

void SparseMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void SparseMatrix::finalize() {
  std::vector<int> nrp(rows_ + 1, 0);
  std::vector<int> nci;
  std::vector<double> nv;
  nci.reserve(col_idx_.size());
  nv.reserve(values_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (values_[p] != 0.0) {
        nci.push_back(col_idx_[p]);
        nv.push_back(values_[p]);
      }
    }
    nrp[i + 1] = static_cast<int>(nci.size());
  }
  row_ptr_ = std::move(nrp);
  col_idx_ = std::move(nci);
  values_ = std::move(nv);
}

void SparseMatrix::matvec(const double* x, double* y) const {
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::apply(const std::vector<double>& x) const {
  assert(static_cast<int>(x.size()) == cols_);
  std::vector<double> y(rows_);
  matvec(x.data(), y.data());
  return y;
}

double SparseMatrix::inner(const std::vector<double>& x, const std::vector<double>& y) const {
  double s = 0.0;
  for (int i = 0; i < rows_; ++i) {
    double r = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) r += values_[p] * y[col_idx_[p]];
    s += x[i] * r;
  }
  return s;
}

SparseMatrix SparseMatrix::restrict(const std::vector<int>& keep_rows,
                                    const std::vector<int>& keep_cols,
                                    const std::vector<int>& row_new_index,
                                    const std::vector<int>& col_new_index) const {
  int nr = 0, nc = 0;
  for (int i = 0; i < rows_; ++i) nr += keep_rows[i] ? 1 : 0;
  for (int j = 0; j < cols_; ++j) nc += keep_cols[j] ? 1 : 0;
  SparseMatrix B(nr, nc);
  B.row_ptr_.assign(nr + 1, 0);
  for (int i = 0; i < rows_; ++i) {
    if (!keep_rows[i]) continue;
    int cnt = 0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      if (keep_cols[col_idx_[p]]) ++cnt;
    B.row_ptr_[row_new_index[i] + 1] = cnt;
  }
  for (int i = 0; i < nr; ++i) B.row_ptr_[i + 1] += B.row_ptr_[i];
  B.col_idx_.resize(B.row_ptr_[nr]);
  B.values_.resize(B.row_ptr_[nr]);
  for (int i = 0; i < rows_; ++i) {
    if (!keep_rows[i]) continue;
    int q = B.row_ptr_[row_new_index[i]];
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (!keep_cols[col_idx_[p]]) continue;
      B.col_idx_[q] = col_new_index[col_idx_[p]];
      B.values_[q] = values_[p];
      ++q;
    }
  }
  return B;
}

// ---------------------------------------------------------------------------

struct SparseSolver::Impl {
  Eigen::SparseMatrix<double> A;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

SparseSolver::SparseSolver(const SparseMatrix& M) : impl_(new Impl), dim_(M.rows()) {
  if (M.rows() != M.cols()) throw std::invalid_argument("SparseSolver: matrix must be square");
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> trips;
  trips.reserve(M.nnz());
  for (int i = 0; i < M.rows(); ++i)
    for (int p = M.row_ptr()[i]; p < M.row_ptr()[i + 1]; ++p)
      trips.emplace_back(i, M.col_idx()[p], M.values()[p]);
  impl_->A.resize(M.rows(), M.cols());
  impl_->A.setFromTriplets(trips.begin(), trips.end());
  impl_->A.makeCompressed();
  impl_->lu.analyzePattern(impl_->A);
  impl_->lu.factorize(impl_->A);
  if (impl_->lu.info() != Eigen::Success)
    throw SingularMatrixError("sparse factorization failed: " + impl_->lu.lastErrorMessage());
}

SparseSolver::~SparseSolver() = default;
SparseSolver::SparseSolver(SparseSolver&&) noexcept = default;
SparseSolver& SparseSolver::operator=(SparseSolver&&) noexcept = default;

std::vector<double> SparseSolver::solve(const std::vector<double>& b) const {
  if (static_cast<int>(b.size()) != dim_)
    throw std::invalid_argument("SparseSolver: rhs size mismatch");
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), dim_);
  Eigen::VectorXd x = impl_->lu.solve(bv);
  if (impl_->lu.info() != Eigen::Success) throw SingularMatrixError("sparse solve failed");
  return std::vector<double>(x.data(), x.data() + dim_);
}

std::vector<double> solve_sparse(const SparseMatrix& A, const std::vector<double>& b) {
  return SparseSolver(A).solve(b);
}

ConstrainedSystem::ConstrainedSystem(const SparseMatrix& A, const std::vector<char>& constrained)
    : constrained_(constrained) {
  const int n = A.rows();
  if (static_cast<int>(constrained.size()) != n)
    throw std::invalid_argument("ConstrainedSystem: mask size mismatch");
  std::vector<int> keep_int(n), keep_bnd(n), idx_int(n, -1), idx_bnd(n, -1);
  for (int i = 0; i < n; ++i) {
    if (constrained[i]) {
      keep_bnd[i] = 1;
      idx_bnd[i] = static_cast<int>(boundary_.size());
      boundary_.push_back(i);
    } else {
      keep_int[i] = 1;
      idx_int[i] = static_cast<int>(interior_.size());
      interior_.push_back(i);
    }
  }
  A_II_ = A.restrict(keep_int, keep_int, idx_int, idx_int);
  A_IB_ = A.restrict(keep_int, keep_bnd, idx_int, idx_bnd);
  solver_ = std::make_unique<SparseSolver>(A_II_);
}

std::vector<double> ConstrainedSystem::solve(const std::vector<double>& b_full,
                                             const std::vector<double>& g_full) const {
  const int ni = static_cast<int>(interior_.size());
  std::vector<double> gb(boundary_.size());
  for (size_t j = 0; j < boundary_.size(); ++j) gb[j] = g_full[boundary_[j]];
  std::vector<double> rhs(ni);
  std::vector<double> Ag(ni, 0.0);
  if (!boundary_.empty()) A_IB_.matvec(gb.data(), Ag.data());
  for (int i = 0; i < ni; ++i) rhs[i] = b_full[interior_[i]] - Ag[i];
  std::vector<double> xi = solver_->solve(rhs);
  std::vector<double> x(b_full.size());
  for (size_t j = 0; j < boundary_.size(); ++j) x[boundary_[j]] = g_full[boundary_[j]];
  for (int i = 0; i < ni; ++i) x[interior_[i]] = xi[i];
  return x;
}

}  // namespace g2duct
