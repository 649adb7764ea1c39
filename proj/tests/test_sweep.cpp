#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "g2duct/errors.hpp"
#include "g2duct/sweep.hpp"

using namespace g2duct;

TEST_CASE("empty grid gives an empty record list") {
  SweepGrid grid;
  DuctGeometry geom(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(geom, 1, SplitKind::CrossedTriangle);
  SolverConfig cfg;
  AAConfig aa;
  CHECK(run_sweep(grid, geom, cfg, aa, mesh).empty());
}

TEST_CASE("duplicate grid points produce identical records") {
  SweepGrid grid;
  grid.U_values = {0.25, 0.25};
  grid.alpha_values = {0.1};
  grid.theta_values = {M_PI / 4.0};
  DuctGeometry geom(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(geom, 1, SplitKind::CrossedTriangle);
  SolverConfig cfg;
  AAConfig aa;
  auto recs = run_sweep(grid, geom, cfg, aa, mesh);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].converged);
  CHECK(recs[0].F == recs[1].F);
  CHECK(recs[0].iters == recs[1].iters);
  CHECK(recs[0].alpha1 == doctest::Approx(0.1 * std::cos(M_PI / 4)).epsilon(1e-14));
}

TEST_CASE("non-converged points are flagged, not dropped") {
  SweepGrid grid;
  grid.U_values = {1.0};
  grid.alpha_values = {0.05, 8.0};  // the large magnitude cannot be solved
  grid.theta_values = {M_PI / 4.0};
  DuctGeometry geom(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(geom, 1, SplitKind::CrossedTriangle);
  SolverConfig cfg;
  cfg.outer_max = 10;
  AAConfig aa;
  aa.m_max = 0;
  auto recs = run_sweep(grid, geom, cfg, aa, mesh);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].converged);
  CHECK(!recs[1].converged);
  CHECK(std::isnan(recs[1].F));
}

TEST_CASE("warm start reuses the transport iterate and converges to the same records") {
  SweepGrid grid;
  grid.U_values = {0.25, 0.125};
  grid.alpha_values = {0.1};
  grid.theta_values = {M_PI / 4.0};
  DuctGeometry geom(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(geom, 1, SplitKind::CrossedTriangle);
  SolverConfig cfg;
  AAConfig aa;
  auto cold = run_sweep(grid, geom, cfg, aa, mesh);
  grid.warm_start = true;
  auto warm = run_sweep(grid, geom, cfg, aa, mesh);
  REQUIRE(warm.size() == cold.size());
  for (size_t i = 0; i < warm.size(); ++i) {
    CHECK(warm[i].converged);
    CHECK(warm[i].F_over_U == doctest::Approx(cold[i].F_over_U).epsilon(1e-6));
  }
}

TEST_CASE("polynomial fits: exactness, recovery, rank deficiency") {
  std::vector<double> x = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
  std::vector<double> lin(x.size()), cub(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    lin[i] = -11.0 + 3.5 * x[i];
    cub[i] = 1.0 - 2.0 * x[i] + 0.5 * x[i] * x[i] - 4.0 * x[i] * x[i] * x[i];
  }
  FitResult f1 = fit_polynomial(x, lin, 1);
  CHECK(f1.max_abs_residual < 1e-13);
  CHECK(f1.coefficients[0] == doctest::Approx(-11.0).epsilon(1e-11));
  CHECK(f1.coefficients[1] == doctest::Approx(3.5).epsilon(1e-9));

  FitResult f3 = fit_polynomial(x, cub, 3);
  CHECK(f3.coefficients[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f3.coefficients[1] == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(f3.coefficients[2] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(f3.coefficients[3] == doctest::Approx(-4.0).epsilon(1e-5));
  CHECK(f3.residuals.size() == x.size());

  std::vector<double> dup = {0.1, 0.1, 0.1, 0.1};
  std::vector<double> fy = {1, 2, 3, 4};
  CHECK_THROWS_AS(fit_polynomial(dup, fy, 2), std::invalid_argument);
  CHECK_THROWS_AS(fit_polynomial(x, lin, 10), std::invalid_argument);
}

TEST_CASE("crossing of two secant lines") {
  std::vector<double> th = {-1.0, 1.0};
  auto cr = find_crossing(th, {-1.0, 1.0}, {1.0, -1.0});  // y = t vs y = -t
  CHECK(cr.theta_cross == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(cr.f_at_cross == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(find_crossing(th, {0.0, 1.0}, {0.5, 1.5}), ParallelLinesError);
}

TEST_CASE("symmetry axis of synthetic data") {
  // even function sampled on an asymmetric grid around 0
  std::vector<double> th, f;
  for (int j = -6; j <= 8; ++j) {
    double t = j * 0.1;
    th.push_back(t);
    f.push_back(3.0 + t * t);
  }
  auto sym = find_symmetry_axis(th, f);
  CHECK(std::abs(sym.theta_S) < 1e-7);
  CHECK(sym.score < 1e-12);

  // monotone data: score stays away from zero
  std::vector<double> fm;
  for (double t : th) fm.push_back(std::exp(t));
  auto mono = find_symmetry_axis(th, fm);
  CHECK(mono.score > 1e-6);

  CHECK_THROWS_AS(find_symmetry_axis({0.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
}

namespace {

std::vector<ForceRecord> synthetic_records(const std::function<double(double, double)>& f,
                                           double U = 0.015625) {
  std::vector<ForceRecord> out;
  for (int j = -4; j <= 6; ++j) {
    for (double alpha : {0.05, 0.2}) {
      ForceRecord r;
      r.U = U;
      r.nu = 1.0;
      r.alpha = alpha;
      r.theta = j * M_PI / 8.0;
      r.alpha1 = alpha * std::cos(r.theta);
      r.alpha2 = alpha * std::sin(r.theta);
      r.F_over_U = f(alpha, r.theta);
      r.F = r.F_over_U * U;
      r.converged = true;
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("identifiability report on synthetic force data") {
  // alpha-independent data: nothing identifiable
  auto flat = synthetic_records([](double, double theta) { return -11.0 + 0.01 * theta; });
  auto rep_flat = identifiable_range_report(flat);
  CHECK(!rep_flat.alpha_identifiable_anywhere);

  // strictly monotone in alpha, no symmetry, no crossing: full range
  auto mono = synthetic_records(
      [](double alpha, double theta) { return -11.0 + alpha * (0.5 + 0.1 * theta); });
  auto rep_mono = identifiable_range_report(mono);
  CHECK(rep_mono.alpha_identifiable_anywhere);
  CHECK(!rep_mono.crossing_theta.has_value());
  CHECK(!rep_mono.symmetry_theta.has_value());
  CHECK(rep_mono.theta_lo == doctest::Approx(-4 * M_PI / 8.0));
  CHECK(rep_mono.theta_hi == doctest::Approx(6 * M_PI / 8.0));

  // crossing at theta = 0.3 and even dependence around theta = 0.6
  auto crossing = synthetic_records([](double alpha, double theta) {
    double t = theta - 0.6;
    return -11.0 + 0.05 * t * t + alpha * (theta - 0.3);
  });
  auto rep = identifiable_range_report(crossing);
  CHECK(rep.alpha_identifiable_anywhere);
  REQUIRE(rep.crossing_theta.has_value());
  CHECK(*rep.crossing_theta == doctest::Approx(0.3).epsilon(0.05));
  CHECK(!rep.text.empty());
}

TEST_CASE("series files are written for plotting") {
  auto recs = synthetic_records([](double a, double t) { return -11.0 + a * t; });
  std::string dir = "test_series_out";
  write_series_files(recs, dir);
  CHECK(std::filesystem::exists(dir));
  size_t count = 0;
  for (auto& e : std::filesystem::directory_iterator(dir)) count += e.is_regular_file();
  CHECK(count > 0);
  std::filesystem::remove_all(dir);
}
