#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "g2duct/config.hpp"
#include "g2duct/export.hpp"

using namespace g2duct;

TEST_CASE("empty config yields the published defaults") {
  std::stringstream ss("");
  RunConfig cfg = parse_config(ss);
  CHECK(cfg.b_i == 1.0);
  CHECK(cfg.b_o == 1.0);
  CHECK(cfg.L == 1.0);
  CHECK(cfg.H == 0.5);
  CHECK(cfg.solver.rho == 1e4);
  CHECK(cfg.solver.tol_outer == 1e-5);
  CHECK(cfg.solver.tol_div == 1e-10);
  CHECK(cfg.solver.degree == 4);
  CHECK(cfg.solver.early_exit_ratio == 0.5);
  CHECK(cfg.aa.sigma_min == 0.1);
  CHECK(cfg.aa.sigma_max == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-15));
  CHECK(cfg.aa.beta == 1.0);
  CHECK(cfg.split == SplitKind::CrossedTriangle);
}

TEST_CASE("polar parameters convert to cartesian") {
  std::stringstream ss("fluid.alpha = 0.1\nfluid.theta = 0.3927\n");
  RunConfig cfg = parse_config(ss);
  FluidParams p = cfg.fluid_params();
  CHECK(p.alpha1 == doctest::Approx(0.0924).epsilon(1e-3));
  CHECK(p.alpha2 == doctest::Approx(0.0383).epsilon(1e-3));
}

TEST_CASE("conflicting parameterizations are rejected") {
  std::stringstream ss("fluid.alpha1 = 0.1\nfluid.alpha = 0.2\nfluid.theta = 0.0\n");
  CHECK_THROWS_WITH_AS(parse_config(ss),
                       "config: give either fluid.alpha1/fluid.alpha2 or fluid.alpha/fluid.theta, "
                       "not both",
                       std::runtime_error);
}

TEST_CASE("parse errors carry the location") {
  std::stringstream ss("solver.rho = 1e4\nnot a key value\n");
  try {
    parse_config(ss, "test.cfg");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
  }

  std::stringstream bad_key("does.not.exist = 3\n");
  CHECK_THROWS(parse_config(bad_key));

  std::stringstream bad_num("solver.rho = fast\n");
  try {
    parse_config(bad_num, "c");
    FAIL("expected a number error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("solver.rho") != std::string::npos);
  }
}

TEST_CASE("model constraints are validated") {
  std::stringstream ss(
      "solver.model = grade2-simplified\nfluid.alpha1 = 0.1\nfluid.alpha2 = 0.1\n");
  CHECK_THROWS(parse_config(ss));

  std::stringstream ok(
      "solver.model = grade2-simplified\nfluid.alpha1 = 0.1\nfluid.alpha2 = -0.1\n");
  CHECK_NOTHROW(parse_config(ok));
}

TEST_CASE("sweep lists and theta_over_pi") {
  std::stringstream ss(
      "sweep.U = 0.015625 0.0078125\nsweep.alpha = 0.01 0.2\nsweep.theta_over_pi = -0.3125 "
      "-0.3125\nsweep.nu = 1\n");
  RunConfig cfg = parse_config(ss);
  CHECK(cfg.sweep.U_values.size() == 2);
  CHECK(cfg.sweep.theta_values[0] == doctest::Approx(-0.3125 * M_PI));
}

TEST_CASE("configured mesh carries the refinement provenance") {
  std::stringstream ss("mesh.n = 1\nmesh.r_u = 1\nmesh.r_b = 2\nmesh.r_p = 1\n");
  RunConfig cfg = parse_config(ss);
  Mesh mesh = build_configured_mesh(cfg);
  CHECK(mesh.r_u == 1);
  CHECK(mesh.r_b == 2);
  CHECK(mesh.r_p == 1);
  mesh.check_conforming();
}

TEST_CASE("manifest audit: every config field in effect appears") {
  RunConfig cfg;
  std::string path = "test_manifest.txt";
  write_manifest(cfg, nullptr, nullptr, path);
  std::ifstream is(path);
  std::stringstream buf;
  buf << is.rdbuf();
  std::string text = buf.str();
  for (const char* key :
       {"model", "geometry.b_i", "geometry.b_o", "geometry.L", "geometry.H", "mesh.n",
        "mesh.split", "mesh.r_u", "mesh.r_b", "mesh.r_p", "fluid.nu", "fluid.alpha1",
        "fluid.alpha2", "fluid.U", "solver.rho", "solver.tol_outer", "solver.tol_div",
        "solver.ipm_max", "solver.outer_max", "solver.early_exit_ratio", "solver.degree",
        "aa.m_max", "aa.sigma_min", "aa.sigma_max", "aa.beta", "output.dir", "output.workers"}) {
    INFO(key);
    CHECK(text.find(key) != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("override strings mirror the file keys") {
  RunConfig cfg;
  apply_override(cfg, "solver.rho", "125");
  apply_override(cfg, "mesh.split", "right-triangle");
  apply_override(cfg, "fluid.U", "0.25");
  CHECK(cfg.solver.rho == 125.0);
  CHECK(cfg.split == SplitKind::RightTriangle);
  CHECK(cfg.U == 0.25);
}
