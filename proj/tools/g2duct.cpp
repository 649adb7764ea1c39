#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "g2duct/config.hpp"
#include "g2duct/errors.hpp"
#include "g2duct/export.hpp"
#include "g2duct/observables.hpp"
#include "g2duct/sweep.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace g2duct;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string model;
  int workers = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "config file (flat key = value)");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--workers", opts.workers, "sweep worker count (or G2DUCT_WORKERS)");
  cmd->add_option("--model", opts.model, "model: stokes|navier-stokes|grade2|grade2-simplified");
  cmd->add_option("--set", opts.overrides, "config override key=value")->take_all();
}

RunConfig make_config(const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
  for (const auto& kv : opts.overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got '" + kv + "'");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.model.empty()) cfg.model = model_from_name(opts.model);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.workers > 0) {
    cfg.workers = opts.workers;
  } else if (const char* env = std::getenv("G2DUCT_WORKERS")) {
    cfg.workers = std::max(1, std::atoi(env));
  }
  cfg.validate();
  return cfg;
}

int cmd_mesh(const CommonOpts& opts, const std::string& import_path) {
  RunConfig cfg = make_config(opts);
  Mesh mesh = import_path.empty() ? build_configured_mesh(cfg) : read_mesh_file(import_path);
  mesh.check_conforming();
  fs::create_directories(cfg.out_dir);
  std::string path = (fs::path(cfg.out_dir) / "mesh.txt").string();
  write_mesh_file(mesh, path);
  std::cout << "mesh: " << mesh.num_vertices() << " vertices, " << mesh.num_cells()
            << " cells, " << mesh.boundary_facets.size() << " boundary facets"
            << " (r_u=" << mesh.r_u << ", r_b=" << mesh.r_b << ", r_p=" << mesh.r_p << ")\n"
            << "area = " << mesh.total_area() << ", wrote " << path << "\n";
  return 0;
}

int cmd_solve(const CommonOpts& opts) {
  RunConfig cfg = make_config(opts);
  Mesh mesh = build_configured_mesh(cfg);
  fs::create_directories(cfg.out_dir);
  FluidParams params = cfg.fluid_params();
  DuctGeometry geom = cfg.geometry();
  FunctionSpace V = FunctionSpace::velocity(mesh, cfg.solver.degree);
  FunctionSpace P = FunctionSpace::pressure(mesh, cfg.solver.degree);

  auto out = [&](const std::string& f) { return (fs::path(cfg.out_dir) / f).string(); };

  switch (cfg.model) {
    case ModelKind::Stokes: {
      Field zero(V);
      StokesResult r = solve_stokes_ipm(V, P, zero, duct_boundary_data(geom, params), cfg.solver);
      write_field_csv(r.u, out("velocity.csv"));
      write_field_csv(r.pi, out("pressure.csv"));
      write_manifest(cfg, nullptr, &r, out("manifest.txt"));
      std::cout << "stokes: " << r.ipm_iterations << " IPM iterations, ||div u|| = " << r.div_norm
                << ", ||u||_H1 = " << norm(r.u, NormKind::H1) << "\n";
      return 0;
    }
    case ModelKind::NavierStokes: {
      StokesResult r = solve_navier_stokes(V, P, cfg.effective_reynolds(),
                                           duct_boundary_data(geom, params), cfg.solver);
      write_field_csv(r.u, out("velocity.csv"));
      write_field_csv(r.pi, out("pressure.csv"));
      write_manifest(cfg, nullptr, &r, out("manifest.txt"));
      std::cout << "navier-stokes (R = " << cfg.effective_reynolds() << "): "
                << r.outer_iterations << " Picard iterations, ||u||_H1 = "
                << norm(r.u, NormKind::H1) << "\n";
      return 0;
    }
    case ModelKind::Grade2: {
      FlowState st = solve_grade2(mesh, params, geom, cfg.solver, cfg.aa);
      write_field_csv(st.u, out("velocity.csv"));
      write_field_csv(st.pi, out("pressure_aux.csv"));
      write_field_csv(st.p, out("pressure.csv"));
      write_field_csv(st.w, out("transport.csv"));
      if (cfg.cell_dump) {
        write_field_cells(st.u, out("velocity_cells.txt"));
        write_field_cells(st.w, out("transport_cells.txt"));
      }
      write_manifest(cfg, &st, nullptr, out("manifest.txt"));
      std::cout << "grade2: " << st.outer_iterations << " outer iterations, converged = "
                << (st.converged ? "yes" : "no") << ", F/U = "
                << force_integral(st, params) / params.U << "\n";
      return 0;
    }
    case ModelKind::Grade2Simplified: {
      SimplifiedState st = solve_grade2_simplified(mesh, params, geom, cfg.solver);
      write_field_csv(st.u, out("velocity.csv"));
      write_field_csv(st.q, out("pressure_modified.csv"));
      write_field_csv(st.z_scalar, out("transport.csv"));
      Field p = simplified_physical_pressure(st, P);
      write_field_csv(p, out("pressure.csv"));
      write_manifest(cfg, nullptr, nullptr, out("manifest.txt"));
      std::cout << "grade2-simplified: " << st.outer_iterations
                << " outer iterations, ||z||_L2 = " << norm(st.z_scalar, NormKind::L2) << "\n";
      return 0;
    }
  }
  return 1;
}

int cmd_force(const CommonOpts& opts) {
  RunConfig cfg = make_config(opts);
  Mesh mesh = build_configured_mesh(cfg);
  FluidParams params = cfg.fluid_params();
  FlowState st = solve_grade2(mesh, params, cfg.geometry(), cfg.solver, cfg.aa);
  ForceRecord rec;
  rec.U = params.U;
  rec.nu = params.nu;
  rec.alpha1 = params.alpha1;
  rec.alpha2 = params.alpha2;
  rec.alpha = params.alpha_magnitude();
  rec.theta = params.alpha_argument();
  rec.F = force_integral(st, params);
  rec.F_over_U = rec.F / rec.U;
  rec.iters = st.outer_iterations;
  rec.converged = st.converged;
  rec.r_u = mesh.r_u;
  rec.r_b = mesh.r_b;
  rec.r_p = mesh.r_p;
  fs::create_directories(cfg.out_dir);
  write_force_records_file({rec}, (fs::path(cfg.out_dir) / "force.csv").string());
  write_force_records({rec}, std::cout);
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  RunConfig cfg = make_config(opts);
  if (cfg.sweep.empty()) throw std::runtime_error("config: sweep grid is empty");
  Mesh mesh = build_configured_mesh(cfg);
  auto records = run_sweep(cfg.sweep, cfg.geometry(), cfg.solver, cfg.aa, mesh, cfg.workers);
  fs::create_directories(cfg.out_dir);
  write_force_records_file(records, (fs::path(cfg.out_dir) / "sweep.csv").string());
  write_series_files(records, (fs::path(cfg.out_dir) / "series").string());
  int bad = 0;
  for (const auto& r : records) bad += r.converged ? 0 : 1;
  std::cout << "sweep: " << records.size() << " points, " << bad << " non-converged, wrote "
            << (fs::path(cfg.out_dir) / "sweep.csv").string() << "\n";
  return 0;
}

void emit(const std::string& text, const std::string& out_file) {
  std::cout << text;
  if (!out_file.empty()) {
    std::ofstream os(out_file);
    if (!os) throw std::runtime_error("cannot open '" + out_file + "' for writing");
    os << text;
  }
}

int cmd_fit(const std::string& csv, int degree, const std::string& out_file) {
  auto records = read_force_records_file(csv);
  // group by (nu, alpha, theta), fit f(U)
  std::map<std::tuple<double, double, double>, std::vector<std::pair<double, double>>> groups;
  for (const auto& r : records)
    if (r.converged) groups[{r.nu, r.alpha, r.theta}].push_back({r.U, r.F_over_U});
  std::ostringstream os;
  os << "nu,alpha,theta,degree,max_abs_residual,coefficients\n";
  for (auto& [key, pts] : groups) {
    std::sort(pts.begin(), pts.end());
    std::vector<double> U, f;
    for (auto [x, y] : pts) {
      U.push_back(x);
      f.push_back(y);
    }
    if (static_cast<int>(U.size()) <= degree) continue;
    FitResult fit = fit_polynomial(U, f, degree);
    os << std::get<0>(key) << "," << std::get<1>(key) << "," << std::get<2>(key) << "," << degree
       << "," << fit.max_abs_residual;
    for (double c : fit.coefficients) os << "," << c;
    os << "\n";
  }
  emit(os.str(), out_file);
  return 0;
}

int cmd_cross(const std::string& csv, double u_select, const std::string& out_file) {
  auto records = read_force_records_file(csv);
  double U = u_select;
  if (U <= 0.0) {
    U = std::numeric_limits<double>::max();
    for (const auto& r : records) U = std::min(U, r.U);
  }
  std::map<double, std::map<double, double>> by_alpha;  // alpha -> theta -> f
  for (const auto& r : records)
    if (r.converged && r.U == U) by_alpha[r.alpha][r.theta] = r.F_over_U;
  if (by_alpha.size() < 2) throw std::runtime_error("cross: need two alpha levels at U");
  const auto& lo = by_alpha.begin()->second;
  const auto& hi = by_alpha.rbegin()->second;
  std::vector<double> thetas, flo, fhi;
  for (const auto& [t, f] : lo) {
    auto it = hi.find(t);
    if (it == hi.end()) continue;
    thetas.push_back(t);
    flo.push_back(f);
    fhi.push_back(it->second);
  }
  auto cr = find_crossing(thetas, flo, fhi);
  std::ostringstream os;
  os << "crossing: theta = " << std::setprecision(10) << cr.theta_cross
     << " (theta/(pi/8) = " << cr.theta_cross / (M_PI / 8.0) << "), f = " << cr.f_at_cross
     << " at U = " << U << "\n";
  emit(os.str(), out_file);
  return 0;
}

int cmd_symmetry(const std::string& csv, const std::string& out_file) {
  auto records = read_force_records_file(csv);
  double U = std::numeric_limits<double>::max();
  for (const auto& r : records) U = std::min(U, r.U);
  std::map<double, std::map<double, double>> by_alpha;
  for (const auto& r : records)
    if (r.converged && r.U == U) by_alpha[r.alpha][r.theta] = r.F_over_U;
  if (by_alpha.empty()) throw std::runtime_error("symmetry: no converged records");
  const auto& line = by_alpha.rbegin()->second;
  std::vector<double> thetas, f;
  for (const auto& [t, v] : line) {
    thetas.push_back(t);
    f.push_back(v);
  }
  auto sym = find_symmetry_axis(thetas, f);
  std::ostringstream os;
  os << "symmetry axis: theta = " << std::setprecision(10) << sym.theta_S
     << " (theta/(pi/16) = " << sym.theta_S / (M_PI / 16.0) << "), score = " << sym.score << "\n";
  emit(os.str(), out_file);
  return 0;
}

int cmd_extrapolate(double a0, double a1, double a2) {
  std::cout << std::setprecision(7) << aitken_extrapolate(a0, a1, a2) << "\n";
  return 0;
}

int cmd_identify(const std::string& csv, const std::string& out_file) {
  auto records = read_force_records_file(csv);
  auto rep = identifiable_range_report(records);
  emit(rep.text, out_file);
  return 0;
}

int cmd_verify(const std::string& suite) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  if (suite == "channel" || suite == "all") {
    FluidParams p = FluidParams::cartesian(1.3, 0.4, 0.2, 0.7);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Point2 x = {unit(rng) * 2.0, unit(rng)};
      auto res = channel_transformed_residual(p, 1.0, x);
      worst = std::max({worst, std::abs(res[0]), std::abs(res[1])});
    }
    check("channel transformed-system residual < 1e-12 at 100 points (max " +
              std::to_string(worst) + ")",
          worst < 1e-12);
    auto v = channel_oracle(p, 1.0, {0.3, 0.5});
    check("channel midline w = 0", v.w[0] == 0.0 && v.w[1] == 0.0);
    auto vc = channel_oracle(p, 1.0, {0.3, 0.25}, /*couette=*/true);
    check("couette w = 0", vc.w[0] == 0.0 && vc.w[1] == 0.0);
  }
  if (suite == "pipe" || suite == "all") {
    FluidParams p = FluidParams::cartesian(2.0, 0.5, -0.1, 0.9);
    double worst = 0.0, worst_id = 0.0;
    for (int i = 0; i < 1000; ++i) {
      double r = std::sqrt(unit(rng)), phi = 2.0 * M_PI * unit(rng);
      std::array<double, 3> x = {r * std::cos(phi), r * std::sin(phi), unit(rng) * 3.0};
      auto v = pipe_oracle(p, x);
      for (int d = 0; d < 3; ++d)
        worst_id = std::max(worst_id, std::abs(v.divN[d] - p.nu * v.w[d]));
      auto dg = pipe_divN_generic(p, x);
      for (int d = 0; d < 3; ++d) worst = std::max(worst, std::abs(dg[d] - v.divN[d]));
      // p = nu pi + alpha1 u3 dpi/dx3
      double lhs = p.nu * v.pi + p.alpha1 * v.u[2] * (-4.0 * p.U);
      worst_id = std::max(worst_id, std::abs(lhs - v.p));
    }
    check("pipe identity div N = nu w and p = nu pi + a1 u pi_x3 (max err " +
              std::to_string(worst_id) + ")",
          worst_id < 1e-13);
    check("pipe div N closed form matches tensor evaluation (max err " + std::to_string(worst) +
              ")",
          worst < 1e-12);
  }
  if (suite == "duct" || suite == "all") {
    DuctGeometry geom(1, 1, 1, 0.5);
    FluidParams p = FluidParams::cartesian(1.0, 0.3, 0.1, 1.0);
    BoundaryData bd = duct_boundary_data(geom, p);
    double g_in[2], g_out[2], wb[2];
    bd.g(FacetTag::Inlet, {-1.0, 0.0}, g_in);
    bd.g(FacetTag::Outlet, {2.0, 0.0}, g_out);
    bd.w_b({-1.0, 0.5}, wb);
    check("duct inlet centerline g = (U, 0)", g_in[0] == p.U && g_in[1] == 0.0);
    check("duct w_b(y=0.5) = (0, 2.2)", wb[0] == 0.0 && std::abs(wb[1] - 2.2) < 1e-14);
    // inlet flux 4U/3 equals outlet flux
    double flux_in = 4.0 * p.U / 3.0;
    double flux_out = 0.0;
    int m = 2000;
    for (int i = 0; i < m; ++i) {
      double y = -geom.H + (i + 0.5) * 2.0 * geom.H / m;
      double g[2];
      bd.g(FacetTag::Outlet, {2.0, y}, g);
      flux_out += g[0] * 2.0 * geom.H / m;
    }
    check("duct inlet/outlet flux balance (midpoint quadrature)",
          std::abs(flux_in - flux_out) < 1e-6);
  }
  if (failures == 0) std::cout << "PASS  verify " << suite << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grade-two contraction-rheometer toolkit"};
  app.require_subcommand(1);

  CommonOpts mesh_opts, solve_opts, force_opts, sweep_opts;
  std::string import_path;

  auto* mesh_cmd = app.add_subcommand("mesh", "build, refine and export the duct mesh");
  add_common(mesh_cmd, mesh_opts);
  mesh_cmd->add_option("--import", import_path, "read a mesh file instead of building");

  auto* solve_cmd = app.add_subcommand("solve", "single solve with manifest and field export");
  add_common(solve_cmd, solve_opts);

  auto* force_cmd = app.add_subcommand("force", "grade-two solve and one force record");
  add_common(force_cmd, force_opts);

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep to CSV");
  add_common(sweep_cmd, sweep_opts);

  std::string csv_path, fit_out;
  int fit_degree = 1;
  auto* fit_cmd = app.add_subcommand("fit", "polynomial fits of f(U) from a sweep CSV");
  fit_cmd->add_option("--csv", csv_path, "force-record CSV")->required();
  fit_cmd->add_option("--degree", fit_degree, "fit degree (default 1)");
  fit_cmd->add_option("--report", fit_out, "also write the report to this file");

  std::string cross_csv, cross_out;
  double cross_u = -1.0;
  auto* cross_cmd = app.add_subcommand("cross", "crossing of constant-alpha trajectories");
  cross_cmd->add_option("--csv", cross_csv, "force-record CSV")->required();
  cross_cmd->add_option("--u", cross_u, "flow rate to analyze (default: smallest in file)");
  cross_cmd->add_option("--report", cross_out, "also write the report to this file");

  std::string sym_csv, sym_out;
  auto* sym_cmd = app.add_subcommand("symmetry", "symmetry axis of f(theta)");
  sym_cmd->add_option("--csv", sym_csv, "force-record CSV")->required();
  sym_cmd->add_option("--report", sym_out, "also write the report to this file");

  std::string id_csv, id_out;
  auto* id_cmd = app.add_subcommand("identify", "identifiability report from a sweep CSV");
  id_cmd->add_option("--csv", id_csv, "force-record CSV")->required();
  id_cmd->add_option("--report", id_out, "also write the report to this file");

  std::vector<double> aitken_vals;
  auto* extr_cmd = app.add_subcommand("extrapolate", "Aitken delta-squared of three values");
  extr_cmd->add_option("values", aitken_vals, "a0 a1 a2")->expected(3);

  std::string verify_suite = "all";
  auto* verify_cmd = app.add_subcommand("verify", "run the closed-form oracle suites");
  verify_cmd->add_option("suite", verify_suite, "channel|pipe|duct|all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (mesh_cmd->parsed()) return cmd_mesh(mesh_opts, import_path);
    if (solve_cmd->parsed()) return cmd_solve(solve_opts);
    if (force_cmd->parsed()) return cmd_force(force_opts);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts);
    if (fit_cmd->parsed()) return cmd_fit(csv_path, fit_degree, fit_out);
    if (cross_cmd->parsed()) return cmd_cross(cross_csv, cross_u, cross_out);
    if (sym_cmd->parsed()) return cmd_symmetry(sym_csv, sym_out);
    if (id_cmd->parsed()) return cmd_identify(id_csv, id_out);
    if (extr_cmd->parsed()) return cmd_extrapolate(aitken_vals[0], aitken_vals[1], aitken_vals[2]);
    if (verify_cmd->parsed()) return cmd_verify(verify_suite);
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
