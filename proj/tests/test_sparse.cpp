#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "g2duct/errors.hpp"
#include "g2duct/sparse.hpp"

using namespace g2duct;

namespace {

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<std::vector<int>> pat(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < static_cast<int>(A.cols()); ++j)
      if (A(i, j) != 0.0) pat[i].push_back(j);
  SparseMatrix S = SparseMatrix::from_pattern(n, static_cast<int>(A.cols()), pat);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < static_cast<int>(A.cols()); ++j)
      if (A(i, j) != 0.0) S.add(i, j, A(i, j));
  return S;
}

}  // namespace

TEST_CASE("solve_sparse: identity and 2x2") {
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
  std::vector<double> b = {1, 2, 3, 4, 5};
  auto x = solve_sparse(dense_to_sparse(I), b);
  for (int i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(b[i]));

  Eigen::MatrixXd A(2, 2);
  A << 2, 1, 1, 2;
  auto y = solve_sparse(dense_to_sparse(A), {3.0, 3.0});
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("solve_sparse matches a dense factorization oracle on random SPD") {
  std::mt19937 rng(99);
  std::normal_distribution<double> gauss;
  const int n = 50;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
  Eigen::MatrixXd A = B.transpose() * B + n * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = gauss(rng);

  Eigen::VectorXd x_ref = A.fullPivLu().solve(b);  // dense oracle
  auto x = solve_sparse(dense_to_sparse(A), std::vector<double>(b.data(), b.data() + n));
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_ref(i)).epsilon(1e-10));

  // residual contract
  Eigen::VectorXd xe = Eigen::Map<Eigen::VectorXd>(x.data(), n);
  CHECK((A * xe - b).norm() <= 1e-10 * (A.norm() * xe.norm() + b.norm()));
}

TEST_CASE("singular matrix reports a factorization failure") {
  Eigen::MatrixXd A(3, 3);
  A << 1, 2, 3, 2, 4, 6, 1, 0, 1;  // rank 2
  CHECK_THROWS_AS(solve_sparse(dense_to_sparse(A), {1.0, 2.0, 3.0}), SingularMatrixError);
}

TEST_CASE("finalize drops exact zeros") {
  std::vector<std::vector<int>> pat = {{0, 1}, {0, 1}};
  SparseMatrix A = SparseMatrix::from_pattern(2, 2, pat);
  A.add(0, 0, 1.0);
  A.add(1, 1, 2.0);
  CHECK(A.nnz() == 4);
  A.finalize();
  CHECK(A.nnz() == 2);
  CHECK(A.coeff(0, 0) == 1.0);
  CHECK(A.coeff(0, 1) == 0.0);
}

TEST_CASE("constrained system eliminates Dirichlet dofs symmetrically") {
  // -u'' = 0 on a 5-point chain with u(0)=1, u(4)=5: linear interior
  const int n = 5;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2.0;
    if (i > 0) A(i, i - 1) = -1.0;
    if (i + 1 < n) A(i, i + 1) = -1.0;
  }
  SparseMatrix S = dense_to_sparse(A);
  std::vector<char> constrained = {1, 0, 0, 0, 1};
  ConstrainedSystem sys(S, constrained);
  std::vector<double> b(n, 0.0), g(n, 0.0);
  g[0] = 1.0;
  g[4] = 5.0;
  auto x = sys.solve(b, g);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(1.0 + i).epsilon(1e-13));
}
