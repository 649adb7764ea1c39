#include "g2duct/grade2.hpp"

#include <cmath>
#include <cstdio>

#include "g2duct/errors.hpp"
#include "g2duct/tensors.hpp"

namespace g2duct {

std::vector<double> assemble_N_divergence(const Field& u, const Field& pi,
                                          const FluidParams& params, const FunctionSpace& W) {
  const FunctionSpace& V = *u.space;
  const FunctionSpace& P = *pi.space;
  if (&V.mesh() != &W.mesh() || &P.mesh() != &W.mesh())
    throw SpaceMismatchError("N divergence: spaces on different meshes");
  const Mesh& mesh = W.mesh();
  const int order = 2 * W.degree() + 2;
  const auto& tabW = BasisTable::get(W.degree(), order);
  const auto& tabV = BasisTable::get(V.degree(), order, /*with_hess=*/true);
  const auto& tabP = BasisTable::get(P.degree(), order);
  const int nw = tabW.n, nv = tabV.n, np = tabP.n;
  const int nloc = nw * 2;
  const double a1 = params.alpha1, a2 = params.alpha2;

  std::vector<double> b(W.num_dofs(), 0.0);
  std::vector<double> store(static_cast<size_t>(256) * nloc);

  cellwise_deterministic(
      mesh.num_cells(),
      [&](int c) {
        double* local = &store[(c % 256) * nloc];
        std::fill(local, local + nloc, 0.0);
        CellMap map(mesh, c);
        for (int q = 0; q < tabW.rule->size(); ++q) {
          const double wq = tabW.rule->weights[q] * map.det;

          std::array<double, 2> uval{};
          std::array<std::array<double, 2>, 2> gu{};
          std::array<std::array<std::array<double, 2>, 2>, 2> hu{};
          for (int i = 0; i < nv; ++i) {
            int node = V.cell_node(c, i);
            double val = tabV.val[q * nv + i];
            Point2 g = map.grad_to_phys(tabV.dref[q * nv + i]);
            auto h = map.hess_to_phys(tabV.href[q * nv + i]);
            for (int comp = 0; comp < 2; ++comp) {
              double coef = u.coeffs[V.dof(node, comp)];
              uval[comp] += coef * val;
              gu[comp][0] += coef * g[0];
              gu[comp][1] += coef * g[1];
              hu[comp][0][0] += coef * h[0];
              hu[comp][0][1] += coef * h[1];
              hu[comp][1][0] += coef * h[1];
              hu[comp][1][1] += coef * h[2];
            }
          }
          std::array<double, 2> gpi{};
          for (int i = 0; i < np; ++i) {
            double coef = pi.coeffs[P.dof(P.cell_node(c, i), 0)];
            Point2 g = map.grad_to_phys(tabP.dref[q * np + i]);
            gpi[0] += coef * g[0];
            gpi[1] += coef * g[1];
          }

          auto divN = divergence_of_N<2>(uval, gu, hu, gpi, a1, a2);
          const double* wv = &tabW.val[q * nw];
          for (int i = 0; i < nw; ++i) {
            local[i * 2 + 0] += wq * wv[i] * divN[0];
            local[i * 2 + 1] += wq * wv[i] * divN[1];
          }
        }
      },
      [&](int c) {
        const double* local = &store[(c % 256) * nloc];
        for (int i = 0; i < nw; ++i)
          for (int comp = 0; comp < 2; ++comp)
            b[W.dof(W.cell_node(c, i), comp)] += local[i * 2 + comp];
      });
  return b;
}

void inflow_dirichlet(const FunctionSpace& W, const Field& g, double alpha1,
                      const std::function<void(const Point2&, double*)>& w_b,
                      std::vector<char>& mask, std::vector<double>& values) {
  mask.assign(W.num_dofs(), 0);
  values.assign(W.num_dofs(), 0.0);
  if (alpha1 == 0.0) return;
  const Mesh& mesh = W.mesh();
  const auto& er = edge_rule(2 * W.degree());
  for (size_t f = 0; f < mesh.boundary_facets.size(); ++f) {
    const auto& bf = mesh.boundary_facets[f];
    const Point2& a = mesh.vertices[bf.v0];
    const Point2& b = mesh.vertices[bf.v1];
    double tx = b[0] - a[0], ty = b[1] - a[1];
    double len = std::hypot(tx, ty);
    double nx = ty / len, ny = -tx / len;
    CellMap map(mesh, bf.cell);
    bool inflow = true;
    for (int q = 0; q < er.size() && inflow; ++q) {
      Point2 phys = {a[0] + tx * er.points[q], a[1] + ty * er.points[q]};
      double gv[2];
      evaluate_field(g, bf.cell, map.to_ref(phys), gv, nullptr, nullptr);
      if (!(alpha1 * (gv[0] * nx + gv[1] * ny) < 0.0)) inflow = false;
    }
    if (!inflow) continue;
    double wb[2];
    for (int node : W.facet_nodes(static_cast<int>(f))) {
      w_b(W.node_position(node), wb);
      for (int comp = 0; comp < W.components(); ++comp) {
        mask[W.dof(node, comp)] = 1;
        values[W.dof(node, comp)] = wb[comp];
      }
    }
  }
}

Field solve_transport(const Field& u, const std::vector<double>& load, const FluidParams& params,
                      const std::vector<char>& inflow_mask, const std::vector<double>& inflow_values,
                      const SolverConfig& cfg) {
  const FunctionSpace& W = *u.space;
  const int order = 2 * W.degree() + 2;
  const double upwind = cfg.upwind_transport ? 0.5 : 0.0;
  SparseMatrix A = assemble_transport_operator(W, u, params.nu, params.alpha1, order, upwind);

  try {
    ConstrainedSystem sys(A, inflow_mask);
    Field w(W);
    w.coeffs = sys.solve(load, inflow_values);
    return w;
  } catch (const SingularMatrixError& e) {
    throw SingularTransportError(std::string("transport operator factorization failed (") +
                                 e.what() + "); alpha1 * ||u||_L2 = " +
                                 std::to_string(params.alpha1 * norm(u, NormKind::L2)));
  }
}

Field recover_physical_pressure(const Field& u, const Field& pi, const FluidParams& params,
                                double* projection_residual) {
  const FunctionSpace& V = *u.space;
  const FunctionSpace& P = *pi.space;
  const Mesh& mesh = V.mesh();
  const int order = 2 * V.degree() + 2;
  const auto& tabP = BasisTable::get(P.degree(), order);
  const auto& tabV = BasisTable::get(V.degree(), order);
  const int np = tabP.n, nv = tabV.n;

  // rhs_i = (u . grad pi, q_i)
  std::vector<double> rhs(P.num_dofs(), 0.0);
  std::vector<double> store(static_cast<size_t>(256) * np);
  cellwise_deterministic(
      mesh.num_cells(),
      [&](int c) {
        double* local = &store[(c % 256) * np];
        std::fill(local, local + np, 0.0);
        CellMap map(mesh, c);
        for (int q = 0; q < tabP.rule->size(); ++q) {
          const double wq = tabP.rule->weights[q] * map.det;
          double ux = 0.0, uy = 0.0;
          for (int i = 0; i < nv; ++i) {
            int node = V.cell_node(c, i);
            ux += tabV.val[q * nv + i] * u.coeffs[V.dof(node, 0)];
            uy += tabV.val[q * nv + i] * u.coeffs[V.dof(node, 1)];
          }
          double gx = 0.0, gy = 0.0;
          for (int i = 0; i < np; ++i) {
            Point2 g = map.grad_to_phys(tabP.dref[q * np + i]);
            double coef = pi.coeffs[P.dof(P.cell_node(c, i), 0)];
            gx += coef * g[0];
            gy += coef * g[1];
          }
          const double ugp = ux * gx + uy * gy;
          for (int i = 0; i < np; ++i) local[i] += wq * tabP.val[q * np + i] * ugp;
        }
      },
      [&](int c) {
        const double* local = &store[(c % 256) * np];
        for (int i = 0; i < np; ++i) rhs[P.dof(P.cell_node(c, i), 0)] += local[i];
      });

  SparseMatrix Mp = assemble_mass(P, 2 * P.degree());
  std::vector<double> proj = solve_sparse(Mp, rhs);

  Field p(P);
  for (int i = 0; i < P.num_dofs(); ++i)
    p.coeffs[i] = params.nu * pi.coeffs[i] + params.alpha1 * proj[i];

  if (projection_residual) {
    // ||Mp proj - rhs|| relative to the rhs scale
    std::vector<double> r = Mp.apply(proj);
    double num = 0.0, den = 1e-300;
    for (size_t i = 0; i < r.size(); ++i) {
      num += (r[i] - rhs[i]) * (r[i] - rhs[i]);
      den += rhs[i] * rhs[i];
    }
    *projection_residual = std::sqrt(num / den);
  }

  // u = 0 pointwise on walls, so p = nu pi exactly there
  for (FacetTag tag : {FacetTag::WallBuffer, FacetTag::WallContraction})
    for (int node : P.boundary_nodes(tag)) p.coeffs[node] = params.nu * pi.coeffs[node];
  return p;
}

// ---------------------------------------------------------------------------

FlowState solve_grade2_with_data(const Mesh& mesh, const FluidParams& params,
                                 const BoundaryData& bd, const SolverConfig& cfg,
                                 const AAConfig& aa, const std::vector<double>* w0_coeffs) {
  cfg.validate();
  aa.validate();
  auto Vp = std::make_shared<FunctionSpace>(mesh, cfg.degree, 2);
  auto Pp = std::make_shared<FunctionSpace>(mesh, cfg.degree - 1, 1);
  const FunctionSpace& V = *Vp;
  const FunctionSpace& P = *Pp;

  StokesIPM ipm(V, P, cfg);
  std::vector<double> g_full = boundary_values_from_data(V, bd);
  check_boundary_compatibility(V, g_full);
  ipm.set_boundary_values(g_full);

  Field g_field(V);
  g_field.coeffs = g_full;
  std::vector<char> inflow_mask;
  std::vector<double> inflow_values;
  inflow_dirichlet(V, g_field, params.alpha1, bd.w_b, inflow_mask, inflow_values);

  FlowState st;
  st.velocity_space = Vp;
  st.pressure_space = Pp;
  st.u = Field(V);
  st.z = Field(V);
  st.w = interpolate(V, bd.w0);
  if (w0_coeffs) {
    if (static_cast<int>(w0_coeffs->size()) != V.num_dofs())
      throw std::invalid_argument("grade2: w0 override has wrong size");
    st.w.coeffs = *w0_coeffs;
  }

  AndersonAccelerator accel(V.num_dofs(), V.num_dofs(), aa);
  std::vector<double> u_prev;
  Field u_hat(V), z_hat(V);

  for (int n = 1; n <= cfg.outer_max; ++n) {
    st.outer_iterations = n;
    std::vector<double> load = ipm.mass().apply(st.w.coeffs);
    u_hat.coeffs = st.u.coeffs;  // start from the accepted iterate
    z_hat.coeffs = st.z.coeffs;  // warm accumulator
    auto run = ipm.run(load, u_hat, z_hat);
    st.total_ipm_iterations += run.iterations;
    if (run.status == IpmStatus::MaxIterations)
      throw NonConvergenceError("grade2: IPM stalled at ||div u|| = " +
                                std::to_string(run.div_norm));

    const int m_before = accel.depth();
    accel.step(u_hat.coeffs, z_hat.coeffs);
    st.u.coeffs = u_hat.coeffs;
    st.z.coeffs = z_hat.coeffs;
    if (cfg.verbose)
      std::fprintf(stderr, "aa: n=%d |dU|=%.3e m=%d->%d sigma=%.3f |gamma|=%.3e\n", n,
                   accel.last_delta_norm(), m_before, accel.depth_after_filter(),
                   accel.last_sigma(), accel.last_gamma_norm());

    if (n >= 2) {
      std::vector<double> diff(V.num_dofs());
      for (int i = 0; i < V.num_dofs(); ++i) diff[i] = st.u.coeffs[i] - u_prev[i];
      double delta = ipm.l2_norm(diff);
      st.residual_history.push_back(delta);
      if (delta <= cfg.tol_outer) {
        st.converged = true;
        break;
      }
    }
    u_prev = st.u.coeffs;

    st.pi = ipm.recover_pressure(st.z);
    std::vector<double> nload = assemble_N_divergence(st.u, st.pi, params, V);
    st.w = solve_transport(st.u, nload, params, inflow_mask, inflow_values, cfg);
    double wn = ipm.l2_norm(st.w.coeffs);
    if (!(wn < 1e10))
      throw NonConvergenceError("grade2: transport iterate blew up (||w|| = " +
                                std::to_string(wn) + ")");
  }
  if (!st.converged && st.outer_iterations >= cfg.outer_max)
    throw NonConvergenceError("grade2: no convergence in " + std::to_string(cfg.outer_max) +
                              " outer iterations (last ||du|| = " +
                              std::to_string(st.residual_history.empty()
                                                 ? -1.0
                                                 : st.residual_history.back()) +
                              ")");

  // final consistent triple at the accepted iterate
  st.pi = ipm.recover_pressure(st.z);
  std::vector<double> nload = assemble_N_divergence(st.u, st.pi, params, V);
  st.w = solve_transport(st.u, nload, params, inflow_mask, inflow_values, cfg);
  st.p = recover_physical_pressure(st.u, st.pi, params, &st.pressure_projection_residual);
  return st;
}

FlowState solve_grade2(const Mesh& mesh, const FluidParams& params, const DuctGeometry& geom,
                       const SolverConfig& cfg, const AAConfig& aa) {
  return solve_grade2_with_data(mesh, params, duct_boundary_data(geom, params), cfg, aa);
}

// ---------------------------------------------------------------------------
// alpha1 + alpha2 = 0 simplified formulation

namespace {

std::vector<double> assemble_rotation_load(const FunctionSpace& V, const Field& u,
                                           const Field& z) {
  const Mesh& mesh = V.mesh();
  const int order = 2 * V.degree() + 2;
  const auto& tabV = BasisTable::get(V.degree(), order);
  const auto& tabZ = BasisTable::get(z.space->degree(), order);
  const int nv = tabV.n, nz = tabZ.n;
  const int nloc = nv * 2;
  std::vector<double> b(V.num_dofs(), 0.0);
  std::vector<double> store(static_cast<size_t>(256) * nloc);
  cellwise_deterministic(
      mesh.num_cells(),
      [&](int c) {
        double* local = &store[(c % 256) * nloc];
        std::fill(local, local + nloc, 0.0);
        CellMap map(mesh, c);
        for (int q = 0; q < tabV.rule->size(); ++q) {
          const double wq = tabV.rule->weights[q] * map.det;
          double ux = 0.0, uy = 0.0, zv = 0.0;
          for (int i = 0; i < nv; ++i) {
            int node = V.cell_node(c, i);
            ux += tabV.val[q * nv + i] * u.coeffs[V.dof(node, 0)];
            uy += tabV.val[q * nv + i] * u.coeffs[V.dof(node, 1)];
          }
          for (int i = 0; i < nz; ++i)
            zv += tabZ.val[q * nz + i] * z.coeffs[z.space->dof(z.space->cell_node(c, i), 0)];
          // rotation term z (-u2, u1) moved to the right-hand side
          const double f0 = zv * uy, f1 = -zv * ux;
          for (int i = 0; i < nv; ++i) {
            local[i * 2 + 0] += wq * tabV.val[q * nv + i] * f0;
            local[i * 2 + 1] += wq * tabV.val[q * nv + i] * f1;
          }
        }
      },
      [&](int c) {
        const double* local = &store[(c % 256) * nloc];
        for (int i = 0; i < nv; ++i)
          for (int comp = 0; comp < 2; ++comp)
            b[V.dof(V.cell_node(c, i), comp)] += local[i * 2 + comp];
      });
  return b;
}

std::vector<double> assemble_curl_load(const FunctionSpace& S, const Field& u, double scale) {
  const Mesh& mesh = S.mesh();
  const int order = 2 * S.degree();
  const auto& tabS = BasisTable::get(S.degree(), order);
  const auto& tabV = BasisTable::get(u.space->degree(), order);
  const int ns = tabS.n, nv = tabV.n;
  std::vector<double> b(S.num_dofs(), 0.0);
  std::vector<double> store(static_cast<size_t>(256) * ns);
  cellwise_deterministic(
      mesh.num_cells(),
      [&](int c) {
        double* local = &store[(c % 256) * ns];
        std::fill(local, local + ns, 0.0);
        CellMap map(mesh, c);
        for (int q = 0; q < tabS.rule->size(); ++q) {
          const double wq = tabS.rule->weights[q] * map.det;
          double curl = 0.0;  // du2/dx - du1/dy
          for (int i = 0; i < nv; ++i) {
            int node = u.space->cell_node(c, i);
            Point2 g = map.grad_to_phys(tabV.dref[q * nv + i]);
            curl += u.coeffs[u.space->dof(node, 1)] * g[0] - u.coeffs[u.space->dof(node, 0)] * g[1];
          }
          for (int i = 0; i < ns; ++i) local[i] += wq * tabS.val[q * ns + i] * scale * curl;
        }
      },
      [&](int c) {
        const double* local = &store[(c % 256) * ns];
        for (int i = 0; i < ns; ++i) b[S.dof(S.cell_node(c, i), 0)] += local[i];
      });
  return b;
}

}  // namespace

SimplifiedState solve_grade2_simplified(const Mesh& mesh, const FluidParams& params,
                                        const DuctGeometry& geom, const SolverConfig& cfg) {
  if (std::abs(params.alpha1 + params.alpha2) != 0.0)
    throw ParameterMismatchError("simplified solver requires alpha1 + alpha2 = 0 exactly");
  cfg.validate();

  auto Vp = std::make_shared<FunctionSpace>(mesh, cfg.degree, 2);
  auto Pp = std::make_shared<FunctionSpace>(mesh, cfg.degree - 1, 1);
  auto Sp = std::make_shared<FunctionSpace>(mesh, cfg.degree, 1);
  const FunctionSpace& V = *Vp;
  const FunctionSpace& P = *Pp;
  const FunctionSpace& S = *Sp;

  StokesIPM ipm(V, P, cfg, params.nu);
  BoundaryData bd = duct_boundary_data(geom, params);
  std::vector<double> g_full = boundary_values_from_data(V, bd);
  check_boundary_compatibility(V, g_full);
  ipm.set_boundary_values(g_full);

  Field g_field(V);
  g_field.coeffs = g_full;
  // scalar inflow set: same alpha1 g.n < 0 rule, data z_b = curl g
  std::vector<char> mask;
  std::vector<double> values;
  auto zb_vec = [&bd](const Point2& x, double* out) { out[0] = bd.z_b(x); };
  inflow_dirichlet(S, g_field, params.alpha1, zb_vec, mask, values);

  SimplifiedState st;
  st.velocity_space = Vp;
  st.pressure_space = Pp;
  st.scalar_space = Sp;
  st.u = Field(V);
  st.q = Field(P);
  st.z_scalar = Field(S);
  Field u_hat(V), z_acc(V);
  std::vector<double> u_prev;
  const double beta = cfg.picard_damping;

  for (int n = 1; n <= cfg.outer_max; ++n) {
    st.outer_iterations = n;
    std::vector<double> load = (n == 1) ? std::vector<double>(V.num_dofs(), 0.0)
                                        : assemble_rotation_load(V, st.u, st.z_scalar);
    auto run = ipm.run(load, u_hat, z_acc);
    if (run.status == IpmStatus::MaxIterations)
      throw NonConvergenceError("simplified grade2: IPM stalled at ||div u|| = " +
                                std::to_string(run.div_norm));
    if (n == 1 || beta == 1.0) {
      st.u.coeffs = u_hat.coeffs;
    } else {
      for (int i = 0; i < V.num_dofs(); ++i)
        st.u.coeffs[i] = (1.0 - beta) * st.u.coeffs[i] + beta * u_hat.coeffs[i];
    }

    if (n >= 2) {
      std::vector<double> diff(V.num_dofs());
      for (int i = 0; i < V.num_dofs(); ++i) diff[i] = st.u.coeffs[i] - u_prev[i];
      double delta = ipm.l2_norm(diff);
      st.residual_history.push_back(delta);
      if (delta <= cfg.tol_outer) {
        st.converged = true;
        break;
      }
      if (!(delta < 1e10)) throw NonConvergenceError("simplified grade2: iterate blew up");
    }
    u_prev = st.u.coeffs;

    // nu z + alpha1 u.grad z = nu curl u
    SparseMatrix A = assemble_transport_operator(S, st.u, params.nu, params.alpha1,
                                                 2 * S.degree() + 2,
                                                 cfg.upwind_transport ? 0.5 : 0.0);
    std::vector<double> rhs = assemble_curl_load(S, st.u, params.nu);
    try {
      ConstrainedSystem sys(A, mask);
      st.z_scalar.coeffs = sys.solve(rhs, values);
    } catch (const SingularMatrixError& e) {
      throw SingularTransportError(std::string("simplified transport failed: ") + e.what());
    }
  }
  if (!st.converged)
    throw NonConvergenceError("simplified grade2: no convergence in " +
                              std::to_string(cfg.outer_max) + " outer iterations");
  st.q = ipm.recover_pressure(z_acc);
  // consistent z at the accepted velocity
  {
    SparseMatrix A = assemble_transport_operator(S, st.u, params.nu, params.alpha1,
                                                 2 * S.degree() + 2,
                                                 cfg.upwind_transport ? 0.5 : 0.0);
    std::vector<double> rhs = assemble_curl_load(S, st.u, params.nu);
    ConstrainedSystem sys(A, mask);
    st.z_scalar.coeffs = sys.solve(rhs, values);
  }
  return st;
}

Field simplified_physical_pressure(const SimplifiedState& state, const FunctionSpace& P) {
  const FunctionSpace& V = *state.u.space;
  const Mesh& mesh = P.mesh();
  const int order = 2 * V.degree();
  const auto& tabP = BasisTable::get(P.degree(), order);
  const auto& tabV = BasisTable::get(V.degree(), order);
  const int np = tabP.n, nv = tabV.n;
  // project |u|^2 / 2 onto P, then add q
  std::vector<double> rhs(P.num_dofs(), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellMap map(mesh, c);
    for (int q = 0; q < tabP.rule->size(); ++q) {
      const double wq = tabP.rule->weights[q] * map.det;
      double ux = 0.0, uy = 0.0;
      for (int i = 0; i < nv; ++i) {
        int node = V.cell_node(c, i);
        ux += tabV.val[q * nv + i] * state.u.coeffs[V.dof(node, 0)];
        uy += tabV.val[q * nv + i] * state.u.coeffs[V.dof(node, 1)];
      }
      const double k = 0.5 * (ux * ux + uy * uy);
      for (int i = 0; i < np; ++i) rhs[P.dof(P.cell_node(c, i), 0)] += wq * tabP.val[q * np + i] * k;
    }
  }
  SparseMatrix Mp = assemble_mass(P, 2 * P.degree());
  std::vector<double> proj = solve_sparse(Mp, rhs);
  // q is the Bernoulli-shifted pressure of the rotational form
  Field p(P);
  for (int i = 0; i < P.num_dofs(); ++i) p.coeffs[i] = state.q.coeffs[i] - proj[i];
  return p;
}

}  // namespace g2duct
