#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "g2duct/assembly.hpp"

using namespace g2duct;

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// exact integral of x^a y^b over the reference triangle
double monomial_integral(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

}  // namespace

TEST_CASE("basis: partition of unity and nodal property") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 1; k <= 4; ++k) {
    const auto& basis = LagrangeBasis::get(k);
    std::vector<double> vals;
    for (int trial = 0; trial < 20; ++trial) {
      double a = unit(rng), b = unit(rng) * (1.0 - a);
      basis.eval({a, b}, vals);
      double s = 0.0;
      for (double v : vals) s += v;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    }
    for (int i = 0; i < basis.size(); ++i) {
      basis.eval(basis.nodes()[i], vals);
      for (int j = 0; j < basis.size(); ++j)
        CHECK(vals[j] == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("basis gradients match central finite differences") {
  const auto& basis = LagrangeBasis::get(4);
  const double h = 1e-6;
  std::vector<double> vp, vm;
  std::vector<Point2> grads;
  Point2 p = {0.31, 0.42};
  basis.eval_grad(p, grads);
  for (int d = 0; d < 2; ++d) {
    Point2 pp = p, pm = p;
    pp[d] += h;
    pm[d] -= h;
    basis.eval(pp, vp);
    basis.eval(pm, vm);
    for (int i = 0; i < basis.size(); ++i) {
      double fd = (vp[i] - vm[i]) / (2.0 * h);
      CHECK(grads[i][d] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("basis second derivatives match finite differences of gradients") {
  const auto& basis = LagrangeBasis::get(4);
  const double h = 1e-6;
  std::vector<std::array<double, 3>> hess;
  std::vector<Point2> gp, gm;
  Point2 p = {0.2, 0.3};
  basis.eval_hess(p, hess);
  basis.eval_grad({p[0] + h, p[1]}, gp);
  basis.eval_grad({p[0] - h, p[1]}, gm);
  for (int i = 0; i < basis.size(); ++i) {
    CHECK(hess[i][0] == doctest::Approx((gp[i][0] - gm[i][0]) / (2 * h)).epsilon(1e-5));
    CHECK(hess[i][1] == doctest::Approx((gp[i][1] - gm[i][1]) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("quadrature: midpoint rule at order 1") {
  const auto& r = triangle_rule(1);
  REQUIRE(r.size() == 1);
  CHECK(r.points[0][0] == doctest::Approx(1.0 / 3.0));
  CHECK(r.points[0][1] == doctest::Approx(1.0 / 3.0));
  CHECK(r.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("quadrature integrates monomials exactly up to the stated order") {
  for (int order = 1; order <= 12; ++order) {
    const auto& r = triangle_rule(order);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) {
        double s = 0.0;
        for (int q = 0; q < r.size(); ++q)
          s += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b);
        CHECK(s == doctest::Approx(monomial_integral(a, b)).epsilon(1e-13).scale(1.0));
      }
    }
  }
}

TEST_CASE("order-8 rule is exact for degree-8 polynomials (quartic basis products)") {
  // a random polynomial of total degree 8 stands in for products of two
  // degree-4 basis functions, which it spans
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto& r = triangle_rule(8);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::array<int, 2>> monos;
    std::vector<double> c;
    double exact = 0.0;
    for (int a = 0; a <= 8; ++a)
      for (int b = 0; a + b <= 8; ++b) {
        monos.push_back({a, b});
        c.push_back(coef(rng));
        exact += c.back() * monomial_integral(a, b);
      }
    double s = 0.0;
    for (int q = 0; q < r.size(); ++q) {
      double v = 0.0;
      for (size_t m = 0; m < monos.size(); ++m)
        v += c[m] * std::pow(r.points[q][0], monos[m][0]) * std::pow(r.points[q][1], monos[m][1]);
      s += r.weights[q] * v;
    }
    CHECK(s == doctest::Approx(exact).epsilon(1e-14));
  }
}

TEST_CASE("function space: closed-form Lagrange dof count and continuity") {
  Mesh mesh = build_rectangle_mesh(0, 1, 0, 1, 3, 3, SplitKind::CrossedTriangle);
  const auto& topo = mesh.topology();
  for (int k = 1; k <= 4; ++k) {
    FunctionSpace S(mesh, k, 1);
    int expected = mesh.num_vertices() + (k - 1) * static_cast<int>(topo.edges.size()) +
                   (k - 1) * (k - 2) / 2 * mesh.num_cells();
    CHECK(S.num_dofs() == expected);
  }

  // continuity: a random coefficient field evaluates identically from the
  // two cells sharing an interior edge
  FunctionSpace S(mesh, 4, 1);
  Field f(S);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double& v : f.coeffs) v = unit(rng);
  int checked = 0;
  for (size_t e = 0; e < topo.edges.size() && checked < 10; ++e) {
    if (topo.edge_cells[e][1] == -1) continue;
    const Point2& a = mesh.vertices[topo.edges[e][0]];
    const Point2& b = mesh.vertices[topo.edges[e][1]];
    Point2 mid = {0.5 * (a[0] + b[0]) + 0.17 * (b[0] - a[0]),
                  0.5 * (a[1] + b[1]) + 0.17 * (b[1] - a[1])};
    double v0, v1;
    evaluate_field(f, topo.edge_cells[e][0], CellMap(mesh, topo.edge_cells[e][0]).to_ref(mid), &v0,
                   nullptr, nullptr);
    evaluate_field(f, topo.edge_cells[e][1], CellMap(mesh, topo.edge_cells[e][1]).to_ref(mid), &v1,
                   nullptr, nullptr);
    CHECK(v0 == doctest::Approx(v1).epsilon(1e-11));
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("assembly: kernel and row-sum identities") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  FunctionSpace V = FunctionSpace::velocity(mesh, 4);

  SparseMatrix K = assemble_grad_grad(V, 8);
  std::vector<double> ones(V.num_dofs(), 1.0);
  std::vector<double> Kx = K.apply(ones);
  double worst = 0.0;
  for (double v : Kx) worst = std::max(worst, std::abs(v));
  CHECK(worst < 1e-12 * V.num_dofs());

  SparseMatrix M = assemble_mass(V, 8);
  double total = M.inner(ones, ones);
  CHECK(total == doctest::Approx(2.0 * g.area()).epsilon(1e-12));

  Field zero(V);
  SparseMatrix C = assemble_convection(V, zero, 10);
  double cmax = 0.0;
  for (double v : C.values()) cmax = std::max(cmax, std::abs(v));
  CHECK(cmax == 0.0);
}

TEST_CASE("patch test: interpolated polynomial differentiates exactly through assembly") {
  Mesh mesh = build_rectangle_mesh(0, 1, 0, 1, 3, 3, SplitKind::RightTriangle);
  FunctionSpace S(mesh, 4, 1);
  Field f = interpolate(S, [](const Point2& p, double* out) { out[0] = p[0] * p[0] * p[1]; });
  SparseMatrix K = assemble_grad_grad(S, 8);
  // int |grad(x^2 y)|^2 over the unit square = 4/9 + 1/5
  CHECK(K.inner(f.coeffs, f.coeffs) == doctest::Approx(4.0 / 9.0 + 1.0 / 5.0).epsilon(1e-12));
  SparseMatrix M = assemble_mass(S, 8);
  // int (x^2 y)^2 = 1/15
  CHECK(M.inner(f.coeffs, f.coeffs) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
}

TEST_CASE("assembly is deterministic") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  FunctionSpace V = FunctionSpace::velocity(mesh, 4);
  SparseMatrix A1 = assemble_operator(V, 1.0, 1e4, 0.0, 8);
  SparseMatrix A2 = assemble_operator(V, 1.0, 1e4, 0.0, 8);
  REQUIRE(A1.nnz() == A2.nnz());
  CHECK(std::memcmp(A1.values().data(), A2.values().data(), sizeof(double) * A1.nnz()) == 0);
}

TEST_CASE("norms: zero, constant, H1 contains L2") {
  Mesh mesh = build_rectangle_mesh(0, 2, 0, 1, 4, 2, SplitKind::CrossedTriangle);
  FunctionSpace S(mesh, 3, 1);
  Field z(S);
  CHECK(norm(z, NormKind::L2) == 0.0);
  CHECK(norm(z, NormKind::H1) == 0.0);
  CHECK(norm(z, NormKind::LinfDof) == 0.0);

  Field c = interpolate(S, [](const Point2&, double* out) { out[0] = 3.25; });
  CHECK(norm(c, NormKind::L2) == doctest::Approx(3.25 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(norm(c, NormKind::H1) == doctest::Approx(3.25 * std::sqrt(2.0)).epsilon(1e-10));
  CHECK(norm(c, NormKind::LinfDof) == doctest::Approx(3.25));

  Field lin = interpolate(S, [](const Point2& p, double* out) { out[0] = p[0]; });
  double l2 = norm(lin, NormKind::L2);
  CHECK(norm(lin, NormKind::H1) == doctest::Approx(std::sqrt(l2 * l2 + 2.0)).epsilon(1e-12));
}
