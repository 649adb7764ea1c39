#include "g2duct/export.hpp"

#include <fstream>
#include <iomanip>

namespace g2duct {

void write_field_csv(const Field& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  const FunctionSpace& V = *f.space;
  os << "x,y,component_0";
  if (V.components() > 1) os << ",component_1";
  os << "\n";
  os << std::setprecision(12);
  for (int n = 0; n < V.num_nodes(); ++n) {
    const Point2& p = V.node_position(n);
    os << p[0] << "," << p[1];
    for (int c = 0; c < V.components(); ++c) os << "," << f.coeffs[V.dof(n, c)];
    os << "\n";
  }
}

void write_field_cells(const Field& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  const FunctionSpace& V = *f.space;
  os << std::setprecision(12);
  for (int c = 0; c < V.mesh().num_cells(); ++c) {
    os << "cell " << c << "\n";
    for (int i = 0; i < V.nodes_per_cell(); ++i) {
      int node = V.cell_node(c, i);
      const Point2& p = V.node_position(node);
      os << "  " << p[0] << " " << p[1];
      for (int comp = 0; comp < V.components(); ++comp) os << " " << f.coeffs[V.dof(node, comp)];
      os << "\n";
    }
  }
}

void write_manifest(const RunConfig& cfg, const FlowState* state, const StokesResult* stokes,
                    const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << std::setprecision(17);
  os << "g2duct run manifest\n";
  os << "model = " << model_name(cfg.model) << "\n";
  os << "geometry.b_i = " << cfg.b_i << "\n";
  os << "geometry.b_o = " << cfg.b_o << "\n";
  os << "geometry.L = " << cfg.L << "\n";
  os << "geometry.H = " << cfg.H << "\n";
  os << "mesh.n = " << cfg.n << "\n";
  os << "mesh.split = "
     << (cfg.split == SplitKind::CrossedTriangle ? "crossed-triangle" : "right-triangle") << "\n";
  os << "mesh.r_u = " << cfg.r_u << "\n";
  os << "mesh.r_b = " << cfg.r_b << "\n";
  os << "mesh.r_p = " << cfg.r_p << "\n";
  os << "mesh.smoothed_corners = " << (cfg.smoothed_corners ? "true" : "false") << "\n";
  if (cfg.smoothed_corners) os << "mesh.chamfer_length = " << cfg.chamfer_length << "\n";
  FluidParams p = cfg.fluid_params();
  os << "fluid.nu = " << p.nu << "\n";
  os << "fluid.alpha1 = " << p.alpha1 << "\n";
  os << "fluid.alpha2 = " << p.alpha2 << "\n";
  os << "fluid.alpha = " << p.alpha_magnitude() << "\n";
  os << "fluid.theta = " << p.alpha_argument() << "\n";
  os << "fluid.U = " << p.U << "\n";
  if (cfg.model == ModelKind::NavierStokes)
    os << "solver.reynolds = " << cfg.effective_reynolds() << "\n";
  os << "solver.rho = " << cfg.solver.rho << "\n";
  os << "solver.tol_outer = " << cfg.solver.tol_outer << "\n";
  os << "solver.tol_div = " << cfg.solver.tol_div << "\n";
  os << "solver.ipm_max = " << cfg.solver.ipm_max << "\n";
  os << "solver.outer_max = " << cfg.solver.outer_max << "\n";
  os << "solver.early_exit_ratio = " << cfg.solver.early_exit_ratio << "\n";
  os << "solver.degree = " << cfg.solver.degree << "\n";
  os << "solver.upwind_transport = " << (cfg.solver.upwind_transport ? "true" : "false") << "\n";
  os << "aa.m_max = " << cfg.aa.m_max << "\n";
  os << "aa.sigma_min = " << cfg.aa.sigma_min << "\n";
  os << "aa.sigma_max = " << cfg.aa.sigma_max << "\n";
  os << "aa.beta = " << cfg.aa.beta << "\n";
  os << "output.dir = " << cfg.out_dir << "\n";
  os << "output.workers = " << cfg.workers << "\n";
  os << "note = outer convergence is checked on the extrapolated iterate\n";
  os << "note = force integral uses F = nu*(contour of n'(grad u + grad u')x - contour of pi n.x);"
        " the doubled viscosity prefactor variant is not used\n";

  if (state) {
    os << "outer_iterations = " << state->outer_iterations << "\n";
    os << "total_ipm_iterations = " << state->total_ipm_iterations << "\n";
    os << "converged = " << (state->converged ? "true" : "false") << "\n";
    os << "pressure_projection_residual = " << state->pressure_projection_residual << "\n";
    os << "residual_history =";
    for (double r : state->residual_history) os << " " << r;
    os << "\n";
  }
  if (stokes) {
    os << "ipm_iterations = " << stokes->ipm_iterations << "\n";
    os << "div_norm = " << stokes->div_norm << "\n";
    os << "outer_iterations = " << stokes->outer_iterations << "\n";
    os << "residual_history =";
    for (double r : stokes->residual_history) os << " " << r;
    os << "\n";
  }
}

}  // namespace g2duct
