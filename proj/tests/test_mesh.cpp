#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "g2duct/mesh.hpp"

using namespace g2duct;

namespace {

double max_contraction_edge(const Mesh& mesh) {
  double m = 0.0;
  for (const auto& f : mesh.boundary_facets) {
    if (f.tag != FacetTag::WallContraction) continue;
    const auto& a = mesh.vertices[f.v0];
    const auto& b = mesh.vertices[f.v1];
    m = std::max(m, std::hypot(a[0] - b[0], a[1] - b[1]));
  }
  return m;
}

double min_diameter_touching(const Mesh& mesh, const Point2& p) {
  double m = 1e300;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const auto& v = mesh.vertices[mesh.cells[c][i]];
      if (std::hypot(v[0] - p[0], v[1] - p[1]) < 1e-12) {
        m = std::min(m, mesh.cell_diameter(c));
        break;
      }
    }
  }
  return m;
}

}  // namespace

TEST_CASE("duct geometry invariants") {
  DuctGeometry g(1, 1, 1, 0.5);
  CHECK(g.area() == doctest::Approx(4.5).epsilon(1e-14));
  CHECK(g.half_height(-0.5) == 1.0);
  CHECK(g.half_height(0.5) == doctest::Approx(0.75));
  CHECK(g.half_height(1.7) == 0.5);
  CHECK_THROWS_AS(DuctGeometry(1, 1, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(DuctGeometry(0, 1, 1, 0.5), std::invalid_argument);
}

TEST_CASE("base mesh: right-triangle split gives 2 cells per quad") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(g, 1, SplitKind::RightTriangle);
  // 3 columns of 2 quads each
  CHECK(mesh.num_cells() == 2 * 6);
  for (int c = 0; c < mesh.num_cells(); ++c) CHECK(mesh.cell_area(c) > 0.0);
  mesh.check_conforming();
}

TEST_CASE("crossed split of an n x n square gives 4 n^2 cells") {
  Mesh mesh = build_rectangle_mesh(0, 1, 0, 1, 32, 32, SplitKind::CrossedTriangle);
  CHECK(mesh.num_cells() == 4 * 32 * 32);
  mesh.check_conforming();
}

TEST_CASE("base mesh area equals the analytic domain area") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  CHECK(mesh.total_area() == doctest::Approx(4.5).epsilon(1e-13));
}

TEST_CASE("uniform refinement: counts, tags, diameters") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh m0 = build_base_mesh(g, 1, SplitKind::CrossedTriangle);
  Mesh m1 = refine_uniform(m0);
  CHECK(m1.num_cells() == 4 * m0.num_cells());
  CHECK(m1.boundary_facets.size() == 2 * m0.boundary_facets.size());
  CHECK(m1.r_u == 1);
  CHECK(m1.max_cell_diameter() == doctest::Approx(0.5 * m0.max_cell_diameter()).epsilon(1e-12));
  m1.check_conforming();

  // tag inheritance: per-tag facet count doubles
  for (FacetTag tag : {FacetTag::Inlet, FacetTag::Outlet, FacetTag::WallBuffer,
                       FacetTag::WallContraction}) {
    auto count = [&](const Mesh& m) {
      size_t k = 0;
      for (const auto& f : m.boundary_facets) k += f.tag == tag ? 1 : 0;
      return k;
    };
    CHECK(count(m1) == 2 * count(m0));
  }

  Mesh m2 = refine_uniform(m1);
  CHECK(m2.num_cells() == 16 * m0.num_cells());
  CHECK(m2.total_area() == doctest::Approx(m0.total_area()).epsilon(1e-13));
}

TEST_CASE("boundary refinement marks nothing away from the contraction") {
  Mesh far = build_rectangle_mesh(10, 11, 0, 1, 4, 4, SplitKind::RightTriangle);
  Mesh ref = refine_boundary(far, DuctGeometry(1, 1, 1, 0.5));
  CHECK(ref.num_cells() == far.num_cells());
  CHECK(ref.r_b == 1);
}

TEST_CASE("boundary refinement shortens every contraction-wall edge") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh m0 = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  Mesh m1 = refine_boundary(m0, g);
  CHECK(m1.r_b == 1);
  CHECK(max_contraction_edge(m1) < max_contraction_edge(m0));
  m1.check_conforming();
  CHECK(m1.total_area() == doctest::Approx(m0.total_area()).epsilon(1e-12));
}

TEST_CASE("point refinement halves the corner cells") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  const Point2 corner = {1.0, 0.5};
  double d = min_diameter_touching(mesh, corner);
  for (int i = 0; i < 3; ++i) {
    Mesh next = refine_points(mesh, g);
    CHECK(next.r_p == mesh.r_p + 1);
    CHECK(next.num_cells() > mesh.num_cells());
    double dn = min_diameter_touching(next, corner);
    CHECK(dn <= 0.5 * d + 1e-13);
    d = dn;
    mesh = std::move(next);
  }
  mesh.check_conforming();
  CHECK(mesh.total_area() == doctest::Approx(g.area()).epsilon(1e-12));
}

TEST_CASE("mixed refinement sequences stay conforming and area-preserving") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  for (int i = 0; i < 4; ++i) mesh = refine_boundary(mesh, g);
  for (int i = 0; i < 5; ++i) mesh = refine_points(mesh, g);
  mesh = refine_uniform(mesh);
  mesh.check_conforming();
  CHECK(mesh.r_u == 1);
  CHECK(mesh.r_b == 4);
  CHECK(mesh.r_p == 5);
  CHECK(mesh.total_area() == doctest::Approx(g.area()).epsilon(1e-12));

  // facet tags partition the boundary (check_conforming verifies), and the
  // contraction stays tagged
  size_t contraction = 0;
  for (const auto& f : mesh.boundary_facets) contraction += f.tag == FacetTag::WallContraction;
  CHECK(contraction > 0);
}

TEST_CASE("production-depth refinement keeps conformity and shape bounds") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  for (int i = 0; i < 9; ++i) mesh = refine_boundary(mesh, g);
  for (int i = 0; i < 12; ++i) mesh = refine_points(mesh, g);
  mesh.check_conforming();
  CHECK(mesh.r_b == 9);
  CHECK(mesh.r_p == 12);
  CHECK(mesh.total_area() == doctest::Approx(g.area()).epsilon(1e-12));
  // shape regularity survives 21 refinement passes
  double worst = 1e300;
  for (int c = 0; c < mesh.num_cells(); ++c)
    worst = std::min(worst, mesh.cell_area(c) / (mesh.cell_diameter(c) * mesh.cell_diameter(c)));
  CHECK(worst > 0.05);
  // corner cells are resolved down to ~2^-12 of the base scale
  CHECK(min_diameter_touching(mesh, {1.0, 0.5}) < 1e-5);
  CHECK(mesh.num_cells() > 10000);
}

TEST_CASE("mesh text format round-trips") {
  DuctGeometry g(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  mesh = refine_points(mesh, g);
  std::stringstream ss;
  write_mesh(mesh, ss);
  Mesh back = read_mesh(ss);
  REQUIRE(back.num_vertices() == mesh.num_vertices());
  REQUIRE(back.num_cells() == mesh.num_cells());
  CHECK(back.vertices == mesh.vertices);
  CHECK(back.cells == mesh.cells);
  REQUIRE(back.boundary_facets.size() == mesh.boundary_facets.size());
  std::set<std::tuple<int, int, int>> a, b;
  for (const auto& f : mesh.boundary_facets)
    a.insert({std::min(f.v0, f.v1), std::max(f.v0, f.v1), static_cast<int>(f.tag)});
  for (const auto& f : back.boundary_facets)
    b.insert({std::min(f.v0, f.v1), std::max(f.v0, f.v1), static_cast<int>(f.tag)});
  CHECK(a == b);
}

TEST_CASE("smoothed-corner variant splits the re-entrant corner") {
  DuctGeometry g(1, 1, 1, 0.5, 0.2);
  Mesh mesh = build_base_mesh(g, 2, SplitKind::CrossedTriangle);
  mesh.check_conforming();
  // the chamfer cuts across x = L, gaining a sliver of area near the corner
  CHECK(mesh.total_area() > DuctGeometry(1, 1, 1, 0.5).area());
  CHECK(g.half_height(0.9) > 1.0 + (0.5 - 1.0) * 0.9);  // above the straight slant
  CHECK(g.half_height(1.1) > 0.5);                      // above the outlet wall
  CHECK(g.half_height(1.0) == doctest::Approx(0.55));   // midpoint of the chamfer
}
