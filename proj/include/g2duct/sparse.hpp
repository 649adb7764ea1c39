#pragma once

#include <memory>
#include <vector>

namespace g2duct {

/// Compressed-row sparse matrix with a fixed pattern.  Entries are
/// accumulated with add(); finalize() drops entries that stayed exactly
/// zero.  Column indices are sorted within each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Build the pattern from per-row column lists (duplicates allowed).
  static SparseMatrix from_pattern(int rows, int cols, std::vector<std::vector<int>>& row_cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(col_idx_.size()); }

  void add(int i, int j, double v);
  double coeff(int i, int j) const;
  void set_zero();
  /// Drop entries that are exactly zero.
  void finalize();

  void matvec(const double* x, double* y) const;
  std::vector<double> apply(const std::vector<double>& x) const;
  /// x' A y
  double inner(const std::vector<double>& x, const std::vector<double>& y) const;

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Row/column restriction to an index subset (keep[i] true rows/cols kept,
  /// renumbered in order).  Used for Dirichlet elimination.
  SparseMatrix restrict(const std::vector<int>& keep_rows,
                        const std::vector<int>& keep_cols,
                        const std::vector<int>& row_new_index,
                        const std::vector<int>& col_new_index) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// Direct factorization of a square SparseMatrix (Eigen SparseLU with
/// COLAMD ordering behind the interface).  Throws SingularMatrixError
/// with the pivot diagnostic when the factorization fails.
class SparseSolver {
 public:
  explicit SparseSolver(const SparseMatrix& A);
  ~SparseSolver();
  SparseSolver(SparseSolver&&) noexcept;
  SparseSolver& operator=(SparseSolver&&) noexcept;

  std::vector<double> solve(const std::vector<double>& b) const;
  int dim() const { return dim_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int dim_ = 0;
};

/// One-shot solve A x = b.
std::vector<double> solve_sparse(const SparseMatrix& A, const std::vector<double>& b);

/// Symmetric Dirichlet elimination: factor the interior block of A once,
/// then solve A x = b subject to x = g on the constrained dofs, moving the
/// boundary columns to the load.
class ConstrainedSystem {
 public:
  ConstrainedSystem(const SparseMatrix& A, const std::vector<char>& constrained);

  std::vector<double> solve(const std::vector<double>& b_full,
                            const std::vector<double>& g_full) const;
  int num_interior() const { return static_cast<int>(interior_.size()); }

 private:
  std::vector<char> constrained_;
  std::vector<int> interior_;   // reduced -> full
  std::vector<int> boundary_;   // boundary order -> full
  SparseMatrix A_II_, A_IB_;
  std::unique_ptr<SparseSolver> solver_;
};

}  // namespace g2duct
