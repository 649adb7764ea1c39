#include "g2duct/stokes.hpp"

#include <cmath>

#include "g2duct/errors.hpp"

namespace g2duct {

void SolverConfig::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("solver config: rho must be positive");
  if (!(tol_outer > 0.0) || !(tol_div > 0.0))
    throw std::invalid_argument("solver config: tolerances must be positive");
  if (!(early_exit_ratio > 0.0) || !(early_exit_ratio < 1.0))
    throw std::invalid_argument("solver config: early exit ratio must be in (0,1)");
  if (!(picard_damping > 0.0) || picard_damping > 1.0)
    throw std::invalid_argument("solver config: picard damping must be in (0,1]");
  if (ipm_max < 1 || outer_max < 1)
    throw std::invalid_argument("solver config: iteration limits must be >= 1");
  if (degree < 1 || degree > 4) throw std::invalid_argument("solver config: degree must be 1..4");
}

StokesIPM::StokesIPM(const FunctionSpace& V, const FunctionSpace& P, const SolverConfig& cfg,
                     double viscosity_coeff)
    : V_(&V), P_(&P), cfg_(cfg) {
  cfg.validate();
  const int q = 2 * V.degree();
  A_ = assemble_operator(V, viscosity_coeff, cfg.rho, 0.0, q);
  M_ = assemble_mass(V, q);
  D_ = assemble_div_div(V, q);
  B_ = assemble_mixed_divergence(P, V, q);
  Mp_ = assemble_mass(P, 2 * P.degree());

  std::vector<char> constrained(V.num_dofs(), 0);
  for (int node : V.all_boundary_nodes())
    for (int c = 0; c < V.components(); ++c) constrained[V.dof(node, c)] = 1;
  bc_system_ = std::make_unique<ConstrainedSystem>(A_, constrained);
  pressure_solver_ = std::make_unique<SparseSolver>(Mp_);
  g_full_.assign(V.num_dofs(), 0.0);
}

void StokesIPM::set_boundary_values(std::vector<double> g_full) {
  if (static_cast<int>(g_full.size()) != V_->num_dofs())
    throw std::invalid_argument("boundary values: size mismatch");
  g_full_ = std::move(g_full);
}

StokesIPM::IpmRun StokesIPM::run(const std::vector<double>& rhs_load, Field& u, Field& z) const {
  const int n = V_->num_dofs();
  if (u.size() != n || z.size() != n) throw std::invalid_argument("ipm: field size mismatch");

  IpmRun out;
  std::vector<double> b(n), Dz(n);
  double prev_div = -1.0;
  for (int ell = 1; ell <= cfg_.ipm_max; ++ell) {
    D_.matvec(z.coeffs.data(), Dz.data());
    for (int i = 0; i < n; ++i) b[i] = rhs_load[i] - Dz[i];
    u.coeffs = bc_system_->solve(b, g_full_);

    // pointwise quadrature evaluation; the quadratic form u'Du loses the
    // small divergence to cancellation
    double div = divergence_norm(u);
    out.iterations = ell;
    out.div_norm = div;
    out.div_history.push_back(div);

    for (int i = 0; i < n; ++i) z.coeffs[i] += cfg_.rho * u.coeffs[i];

    if (div <= cfg_.tol_div) {
      out.status = IpmStatus::Converged;
      return out;
    }
    if (ell > 2 && prev_div > 0.0 && div / prev_div > cfg_.early_exit_ratio) {
      out.status = IpmStatus::EarlyExit;
      return out;
    }
    prev_div = div;
  }
  out.status = IpmStatus::MaxIterations;
  return out;
}

Field StokesIPM::recover_pressure(const Field& z) const {
  std::vector<double> rhs = B_.apply(z.coeffs);
  for (double& v : rhs) v = -v;
  Field pi(*P_);
  pi.coeffs = pressure_solver_->solve(rhs);
  double mean = mean_value(pi);
  for (double& v : pi.coeffs) v -= mean;
  return pi;
}

Field recover_pressure(const Field& z, const FunctionSpace& P) {
  const FunctionSpace& V = *z.space;
  SparseMatrix B = assemble_mixed_divergence(P, V, 2 * V.degree());
  std::vector<double> rhs = B.apply(z.coeffs);
  for (double& v : rhs) v = -v;
  SparseMatrix Mp = assemble_mass(P, 2 * P.degree());
  Field pi(P);
  pi.coeffs = solve_sparse(Mp, rhs);
  return pi;
}

double StokesIPM::l2_norm(const std::vector<double>& coeffs) const {
  return std::sqrt(std::max(0.0, M_.inner(coeffs, coeffs)));
}

std::vector<double> boundary_values_from_data(const FunctionSpace& V, const BoundaryData& bd) {
  std::vector<double> g(V.num_dofs(), 0.0);
  double vals[2];
  for (FacetTag tag : {FacetTag::WallBuffer, FacetTag::WallContraction, FacetTag::Inlet,
                       FacetTag::Outlet}) {
    for (int node : V.boundary_nodes(tag)) {
      bd.g(tag, V.node_position(node), vals);
      for (int c = 0; c < V.components(); ++c) g[V.dof(node, c)] = vals[c];
    }
  }
  return g;
}

void check_boundary_compatibility(const FunctionSpace& V, const std::vector<double>& g_full) {
  Field gf(V);
  gf.coeffs = g_full;
  double flux = boundary_flux(gf);
  double scale = 1.0;
  for (double v : g_full) scale = std::max(scale, std::abs(v));
  if (std::abs(flux) > 1e-8 * scale)
    throw IncompatibleBoundaryDataError("boundary data has net flux " + std::to_string(flux));
}

StokesResult solve_stokes_ipm(const FunctionSpace& V, const FunctionSpace& P, const Field& w_rhs,
                              const BoundaryData& g, const SolverConfig& cfg) {
  StokesIPM ipm(V, P, cfg);
  std::vector<double> gv = boundary_values_from_data(V, g);
  check_boundary_compatibility(V, gv);
  ipm.set_boundary_values(std::move(gv));

  std::vector<double> load = ipm.mass().apply(w_rhs.coeffs);
  StokesResult res;
  res.u = Field(V);
  res.z = Field(V);
  auto run = ipm.run(load, res.u, res.z);
  res.ipm_iterations = run.iterations;
  res.div_norm = run.div_norm;
  res.status = run.status;
  if (run.status == IpmStatus::MaxIterations)
    throw NonConvergenceError("IPM did not reach the divergence tolerance in " +
                              std::to_string(cfg.ipm_max) + " iterations (||div u|| = " +
                              std::to_string(run.div_norm) + ")");
  res.pi = ipm.recover_pressure(res.z);
  return res;
}

StokesResult solve_navier_stokes(const FunctionSpace& V, const FunctionSpace& P, double reynolds,
                                 const BoundaryData& g, const SolverConfig& cfg) {
  if (reynolds < 0.0) throw std::invalid_argument("navier-stokes: R must be nonnegative");
  StokesIPM ipm(V, P, cfg);
  std::vector<double> gv = boundary_values_from_data(V, g);
  check_boundary_compatibility(V, gv);
  ipm.set_boundary_values(std::move(gv));

  StokesResult res;
  res.u = Field(V);
  res.z = Field(V);
  Field u_hat(V);
  Field u_prev(V);
  const double beta = cfg.picard_damping;
  std::vector<double> load(V.num_dofs(), 0.0);

  for (int n = 1; n <= cfg.outer_max; ++n) {
    auto run = ipm.run(load, u_hat, res.z);
    res.ipm_iterations = run.iterations;
    res.div_norm = run.div_norm;
    res.status = run.status;
    res.outer_iterations = n;
    if (run.status == IpmStatus::MaxIterations)
      throw NonConvergenceError("navier-stokes: inner IPM stalled at ||div u|| = " +
                                std::to_string(run.div_norm));

    if (n == 1 || beta == 1.0) {
      res.u.coeffs = u_hat.coeffs;
    } else {
      for (int i = 0; i < V.num_dofs(); ++i)
        res.u.coeffs[i] = (1.0 - beta) * res.u.coeffs[i] + beta * u_hat.coeffs[i];
    }

    if (n > 1) {
      std::vector<double> diff(V.num_dofs());
      for (int i = 0; i < V.num_dofs(); ++i) diff[i] = res.u.coeffs[i] - u_prev.coeffs[i];
      double delta = ipm.l2_norm(diff);
      res.residual_history.push_back(delta);
      if (delta <= cfg.tol_outer) {
        res.pi = ipm.recover_pressure(res.z);
        return res;
      }
      if (!(delta < 1e10))
        throw NonConvergenceError("navier-stokes: iterate norm blew up (||du|| = " +
                                  std::to_string(delta) + ")");
    }
    u_prev.coeffs = res.u.coeffs;

    if (reynolds != 0.0) {
      SparseMatrix C = assemble_convection(V, res.u, 2 * V.degree() + 2);
      load = C.apply(res.u.coeffs);
      for (double& v : load) v = -reynolds * v;
    }
  }
  throw NonConvergenceError("navier-stokes: no convergence in " + std::to_string(cfg.outer_max) +
                            " Picard iterations");
}

}  // namespace g2duct
