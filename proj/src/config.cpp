#include "g2duct/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace g2duct {

const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::Stokes: return "stokes";
    case ModelKind::NavierStokes: return "navier-stokes";
    case ModelKind::Grade2: return "grade2";
    case ModelKind::Grade2Simplified: return "grade2-simplified";
  }
  return "?";
}

ModelKind model_from_name(const std::string& s) {
  if (s == "stokes") return ModelKind::Stokes;
  if (s == "navier-stokes") return ModelKind::NavierStokes;
  if (s == "grade2") return ModelKind::Grade2;
  if (s == "grade2-simplified") return ModelKind::Grade2Simplified;
  throw std::runtime_error("unknown model '" + s + "'");
}

DuctGeometry RunConfig::geometry() const {
  return DuctGeometry(b_i, b_o, L, H, smoothed_corners ? chamfer_length : 0.0);
}

FluidParams RunConfig::fluid_params() const {
  if (polar_given) return FluidParams::from_polar(nu, alpha, theta, U);
  return FluidParams::cartesian(nu, alpha1, alpha2, U);
}

void RunConfig::validate() const {
  if (polar_given && cartesian_given)
    throw std::runtime_error(
        "config: give either fluid.alpha1/fluid.alpha2 or fluid.alpha/fluid.theta, not both");
  solver.validate();
  aa.validate();
  if (model == ModelKind::Grade2Simplified) {
    FluidParams p = fluid_params();
    if (p.alpha1 + p.alpha2 != 0.0)
      throw std::runtime_error("config: model grade2-simplified requires alpha1 + alpha2 = 0");
  }
  geometry();  // throws on invalid dimensions
  if (n < 1) throw std::runtime_error("config: mesh.n must be >= 1");
  if (r_u < 0 || r_b < 0 || r_p < 0)
    throw std::runtime_error("config: refinement counts must be >= 0");
  if (workers < 1) throw std::runtime_error("config: workers must be >= 1");
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos;
    double d = std::stod(v, &pos);
    while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config: field '" + key + "': bad number '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  double d = parse_double(key, v);
  int i = static_cast<int>(std::lround(d));
  if (i != d) throw std::runtime_error("config: field '" + key + "': expected integer, got '" + v + "'");
  return i;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::runtime_error("config: field '" + key + "': bad boolean '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (ss >> tok) {
    if (tok == ",") continue;
    if (!tok.empty() && tok.back() == ',') tok.pop_back();
    out.push_back(parse_double(key, tok));
  }
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "geometry.b_i") cfg.b_i = parse_double(key, v);
  else if (key == "geometry.b_o") cfg.b_o = parse_double(key, v);
  else if (key == "geometry.L") cfg.L = parse_double(key, v);
  else if (key == "geometry.H") cfg.H = parse_double(key, v);
  else if (key == "mesh.n") cfg.n = parse_int(key, v);
  else if (key == "mesh.split") {
    if (v == "crossed-triangle") cfg.split = SplitKind::CrossedTriangle;
    else if (v == "right-triangle") cfg.split = SplitKind::RightTriangle;
    else throw std::runtime_error("config: mesh.split: unknown split '" + v + "'");
  } else if (key == "mesh.r_u") cfg.r_u = parse_int(key, v);
  else if (key == "mesh.r_b") cfg.r_b = parse_int(key, v);
  else if (key == "mesh.r_p") cfg.r_p = parse_int(key, v);
  else if (key == "mesh.smoothed_corners") cfg.smoothed_corners = parse_bool(key, v);
  else if (key == "mesh.chamfer_length") cfg.chamfer_length = parse_double(key, v);
  else if (key == "fluid.nu") cfg.nu = parse_double(key, v);
  else if (key == "fluid.alpha1") {
    cfg.alpha1 = parse_double(key, v);
    cfg.cartesian_given = true;
  } else if (key == "fluid.alpha2") {
    cfg.alpha2 = parse_double(key, v);
    cfg.cartesian_given = true;
  } else if (key == "fluid.alpha") {
    cfg.alpha = parse_double(key, v);
    cfg.polar_given = true;
  } else if (key == "fluid.theta") {
    cfg.theta = parse_double(key, v);
    cfg.polar_given = true;
  } else if (key == "fluid.theta_over_pi") {
    cfg.theta = parse_double(key, v) * M_PI;
    cfg.polar_given = true;
  } else if (key == "fluid.U") cfg.U = parse_double(key, v);
  else if (key == "solver.model") cfg.model = model_from_name(v);
  else if (key == "solver.rho") cfg.solver.rho = parse_double(key, v);
  else if (key == "solver.tol_outer") cfg.solver.tol_outer = parse_double(key, v);
  else if (key == "solver.tol_div") cfg.solver.tol_div = parse_double(key, v);
  else if (key == "solver.ipm_max") cfg.solver.ipm_max = parse_int(key, v);
  else if (key == "solver.outer_max") cfg.solver.outer_max = parse_int(key, v);
  else if (key == "solver.early_exit_ratio") cfg.solver.early_exit_ratio = parse_double(key, v);
  else if (key == "solver.picard_damping") cfg.solver.picard_damping = parse_double(key, v);
  else if (key == "solver.verbose") cfg.solver.verbose = parse_bool(key, v);
  else if (key == "solver.degree") cfg.solver.degree = parse_int(key, v);
  else if (key == "solver.upwind_transport") cfg.solver.upwind_transport = parse_bool(key, v);
  else if (key == "solver.reynolds") cfg.reynolds = parse_double(key, v);
  else if (key == "aa.m_max") cfg.aa.m_max = parse_int(key, v);
  else if (key == "aa.sigma_min") cfg.aa.sigma_min = parse_double(key, v);
  else if (key == "aa.sigma_max") cfg.aa.sigma_max = parse_double(key, v);
  else if (key == "aa.beta") cfg.aa.beta = parse_double(key, v);
  else if (key == "sweep.U") cfg.sweep.U_values = parse_list(key, v);
  else if (key == "sweep.nu") cfg.sweep.nu_values = parse_list(key, v);
  else if (key == "sweep.alpha") cfg.sweep.alpha_values = parse_list(key, v);
  else if (key == "sweep.theta") cfg.sweep.theta_values = parse_list(key, v);
  else if (key == "sweep.theta_over_pi") {
    cfg.sweep.theta_values = parse_list(key, v);
    for (double& t : cfg.sweep.theta_values) t *= M_PI;
  } else if (key == "sweep.warm_start") cfg.sweep.warm_start = parse_bool(key, v);
  else if (key == "output.dir") cfg.out_dir = v;
  else if (key == "output.workers") cfg.workers = parse_int(key, v);
  else if (key == "output.cell_dump") cfg.cell_dump = parse_bool(key, v);
  else throw std::runtime_error("config: unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& is, const std::string& name) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    try {
      apply_override(cfg, key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config '" + path + "'");
  return parse_config(is, path);
}

Mesh build_configured_mesh(const RunConfig& cfg) {
  DuctGeometry geom = cfg.geometry();
  Mesh mesh = build_base_mesh(geom, cfg.n, cfg.split);
  for (int i = 0; i < cfg.r_u; ++i) mesh = refine_uniform(mesh);
  for (int i = 0; i < cfg.r_b; ++i) mesh = refine_boundary(mesh, geom);
  for (int i = 0; i < cfg.r_p; ++i) mesh = refine_points(mesh, geom);
  return mesh;
}

}  // namespace g2duct
